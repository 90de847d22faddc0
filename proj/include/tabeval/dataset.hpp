#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tabeval {

struct DatasetRecord {
  std::string id;
  std::string text;
  std::string intent;
  std::string table;  // HTML or markdown
};

struct PredictionRecord {
  std::string id;
  std::string model_id;
  std::string table;  // markdown, "NaN" marks empty cells
};

struct RatingRecord {
  std::string table_id;
  std::string model_id;
  std::string rater_id;
  int overall = 0;
  int correctness = 0;
  int completeness = 0;
};

// JSONL readers. Blank lines are skipped; malformed lines throw ConfigError
// naming the 1-based line number.
std::vector<DatasetRecord> parse_dataset_jsonl(std::string_view content);
std::vector<PredictionRecord> parse_predictions_jsonl(std::string_view content);
std::vector<RatingRecord> parse_ratings_jsonl(std::string_view content);

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<RatingRecord> read_ratings(const std::filesystem::path& path);

nlohmann::json to_json(const DatasetRecord& r);
nlohmann::json to_json(const PredictionRecord& r);
nlohmann::json to_json(const RatingRecord& r);

}  // namespace tabeval
