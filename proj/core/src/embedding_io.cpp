#include "fiqa/embedding_io.hpp"

#include <istream>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "fiqa/error.hpp"
#include "fiqa/io.hpp"

namespace fiqa {
namespace {

EmbeddingRecord parse_record(const std::string& line) {
  const auto json = nlohmann::json::parse(line);
  if (!json.is_object()) throw DataError("expected a JSON object");
  for (const char* field : {"subject", "image", "vec"}) {
    if (!json.contains(field)) throw DataError(std::string("missing field '") + field + "'");
  }
  if (!json["subject"].is_string() || !json["image"].is_string())
    throw DataError("'subject' and 'image' must be strings");
  const auto& vec = json["vec"];
  if (!vec.is_array() || vec.empty()) throw DataError("'vec' must be a non-empty array");

  EmbeddingRecord record;
  record.subject_id = json["subject"].get<std::string>();
  record.image_id = json["image"].get<std::string>();
  record.vector.reserve(vec.size());
  for (const auto& v : vec) {
    if (!v.is_number()) throw DataError("'vec' entries must be numbers");
    record.vector.push_back(v.get<double>());
  }
  return record;
}

}  // namespace

Dataset read_embeddings(std::istream& in, const std::string& source) {
  std::optional<Dataset> dataset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto record = parse_record(line);
      if (!dataset) dataset.emplace(record.vector.size());
      dataset->add(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    } catch (const Error& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!dataset) throw DataError(source + ": no embedding records");
  return std::move(*dataset);
}

Dataset load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const Dataset& dataset) {
  for (const auto& record : dataset.records()) {
    // Emitted by hand so reals carry 17 significant digits.
    out << "{\"subject\": " << nlohmann::json(record.subject_id).dump()
        << ", \"image\": " << nlohmann::json(record.image_id).dump() << ", \"vec\": [";
    for (std::size_t i = 0; i < record.vector.size(); ++i) {
      if (i) out << ", ";
      out << format_real(record.vector[i]);
    }
    out << "]}\n";
  }
}

void save_embeddings(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_output(path);
  write_embeddings(out, dataset);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace fiqa
