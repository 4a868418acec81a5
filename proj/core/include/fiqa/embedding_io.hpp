#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fiqa/embedding.hpp"

namespace fiqa {

// JSON Lines, one record per line:
//   {"subject": "<id>", "image": "<id>", "vec": [<D reals>]}
// The dimension is taken from the first record. Blank lines are skipped.
// Errors are DataError prefixed with "<source>:<line>:".

Dataset read_embeddings(std::istream& in, const std::string& source = "<stream>");
Dataset load_embeddings(const std::filesystem::path& path);

void write_embeddings(std::ostream& out, const Dataset& dataset);
void save_embeddings(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace fiqa
