#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tabeval/table.hpp"

namespace tabeval {

struct Statement {
  std::string text;
  std::vector<std::size_t> supporting_rows;
  // Set by the response parser when no row could be attributed.
  bool attribution_missing = false;

  friend bool operator==(const Statement&, const Statement&) = default;
};

enum class StatementSource { deterministic, llm };

struct StatementSet {
  std::vector<Statement> statements;
  StatementSource source = StatementSource::deterministic;
  std::string prompt_version;  // llm only

  std::size_t size() const { return statements.size(); }
  bool empty() const { return statements.empty(); }
  std::vector<std::string> texts() const;

  friend bool operator==(const StatementSet&, const StatementSet&) = default;
};

struct AnchorChoice {
  std::vector<std::size_t> column_indices;
  bool exhaustive = false;

  friend bool operator==(const AnchorChoice&, const AnchorChoice&) = default;
};

// Smallest row-unique column subset, searched by cardinality 1..max_size and
// lexicographic index order within a cardinality. Falls back to every column
// with exhaustive = true.
AnchorChoice detect_anchor(const Table& table, std::size_t max_size = 3);

// True when the cell values of `columns` are distinct across all rows.
bool is_row_unique(const Table& table, const std::vector<std::size_t>& columns);

struct DeterministicOptions {
  std::size_t max_anchor_size = 3;
};

// Template statements anchored on detect_anchor's columns, row-major and
// column-ascending. Throws EmptyTable for a table without rows.
StatementSet unroll_deterministic(const Table& table, const DeterministicOptions& opts = {});

// The few-shot chain-of-thought prompt for LLM unrolling.
std::string build_unroll_prompt(const Table& table);

// Content-derived identifier of the prompt template.
const std::string& unroll_prompt_version();

inline constexpr std::string_view kFormatNudge = "Output only the Statements and Rows sections.";

// Reads the "Statements:" and "Rows:" sections of a model response. Listed
// rows are matched back to `table` rows; inline [n] citations take precedence.
// Throws UnparseableResponse when there is no Statements section.
StatementSet parse_unroll_response(std::string_view response, const Table& table);
StatementSet parse_unroll_response(std::string_view response);

struct UnsupportedStatement {
  std::size_t index = 0;
  std::vector<std::string> missing_tokens;
  std::vector<std::size_t> bad_rows;  // supporting rows outside the table
};

struct AttributionReport {
  std::vector<UnsupportedStatement> flagged;

  bool clean() const { return flagged.empty(); }
};

// Flags statements whose content words (length >= 3, minus function words)
// do not all occur in the table's intent, headers or cells.
AttributionReport validate_attribution(const StatementSet& statements, const Table& table);

// Removes the flagged statements (strict mode).
StatementSet drop_unsupported(const StatementSet& statements, const AttributionReport& report);

class Unroller {
 public:
  virtual ~Unroller() = default;
  virtual StatementSet unroll(const Table& table) = 0;
};

class DeterministicUnroller final : public Unroller {
 public:
  explicit DeterministicUnroller(DeterministicOptions opts = {}) : opts_(opts) {}
  StatementSet unroll(const Table& table) override { return unroll_deterministic(table, opts_); }

 private:
  DeterministicOptions opts_;
};

}  // namespace tabeval
