#include "tabeval/dataset.hpp"

#include <set>
#include <sstream>

#include "tabeval/error.hpp"
#include "tabeval/fs.hpp"

namespace tabeval {

using nlohmann::json;

namespace {

template <typename F>
void for_each_line(std::string_view content, F&& f) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(json::parse(line), no);
    } catch (const json::exception& e) {
      throw ConfigError("line " + std::to_string(no) + ": " + e.what());
    }
  }
}

std::string required_string(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ConfigError("line " + std::to_string(line) + ": missing string field \"" + key + "\"");
  return j.at(key).get<std::string>();
}

int rating(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw ConfigError("line " + std::to_string(line) + ": missing integer field \"" + key + "\"");
  auto v = j.at(key).get<long long>();
  if (v < 1 || v > 5)
    throw ConfigError("line " + std::to_string(line) + ": " + key + " rating " + std::to_string(v) +
                      " is outside 1-5");
  return static_cast<int>(v);
}

}  // namespace

std::vector<DatasetRecord> parse_dataset_jsonl(std::string_view content) {
  std::vector<DatasetRecord> out;
  std::set<std::string> ids;
  for_each_line(content, [&](const json& j, std::size_t line) {
    DatasetRecord r{required_string(j, "id", line), j.value("text", std::string()), j.value("intent", std::string()),
                    required_string(j, "table", line)};
    if (!ids.insert(r.id).second) throw ConfigError("line " + std::to_string(line) + ": duplicate id " + r.id);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<PredictionRecord> parse_predictions_jsonl(std::string_view content) {
  std::vector<PredictionRecord> out;
  std::set<std::pair<std::string, std::string>> keys;
  for_each_line(content, [&](const json& j, std::size_t line) {
    PredictionRecord r{required_string(j, "id", line), j.value("model_id", std::string("default")),
                       required_string(j, "table", line)};
    if (!keys.insert({r.model_id, r.id}).second)
      throw ConfigError("line " + std::to_string(line) + ": duplicate prediction " + r.id + " for model " +
                        r.model_id);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<RatingRecord> parse_ratings_jsonl(std::string_view content) {
  std::vector<RatingRecord> out;
  for_each_line(content, [&](const json& j, std::size_t line) {
    out.push_back(RatingRecord{required_string(j, "table_id", line), required_string(j, "model_id", line),
                               required_string(j, "rater_id", line), rating(j, "overall", line),
                               rating(j, "correctness", line), rating(j, "completeness", line)});
  });
  return out;
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  return parse_dataset_jsonl(read_file(path));
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  return parse_predictions_jsonl(read_file(path));
}

std::vector<RatingRecord> read_ratings(const std::filesystem::path& path) {
  return parse_ratings_jsonl(read_file(path));
}

json to_json(const DatasetRecord& r) {
  return {{"id", r.id}, {"text", r.text}, {"intent", r.intent}, {"table", r.table}};
}

json to_json(const PredictionRecord& r) { return {{"id", r.id}, {"model_id", r.model_id}, {"table", r.table}}; }

json to_json(const RatingRecord& r) {
  return {{"table_id", r.table_id},       {"model_id", r.model_id},
          {"rater_id", r.rater_id},       {"overall", r.overall},
          {"correctness", r.correctness}, {"completeness", r.completeness}};
}

}  // namespace tabeval
