#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tabeval {

enum class SourceFormat { html, markdown };

// Cell values compared case-insensitively to decide emptiness.
struct EmptyTokens {
  std::set<std::string> tokens{"nan", "n/a", "-", "\xE2\x80\x94"};

  bool matches(std::string_view normalized) const;
  static const EmptyTokens& defaults();
};

struct Cell {
  std::string text;  // "" whenever is_empty
  bool is_empty = true;

  static Cell from_raw(std::string_view raw, const EmptyTokens& empties = EmptyTokens::defaults());

  friend bool operator==(const Cell&, const Cell&) = default;
};

// A rectangular grid with flat column labels. Spans are already expanded.
// Equality compares content only; source_format is provenance.
struct Table {
  std::string intent;
  std::vector<std::string> column_headers;
  std::vector<std::vector<Cell>> rows;
  SourceFormat source_format = SourceFormat::markdown;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_cols() const { return column_headers.size(); }
  const Cell& at(std::size_t r, std::size_t c) const { return rows[r][c]; }

  // Throws MalformedTable when the shape invariants do not hold.
  void validate() const;

  friend bool operator==(const Table& a, const Table& b) {
    return a.intent == b.intent && a.column_headers == b.column_headers && a.rows == b.rows;
  }
};

struct ParseOptions {
  EmptyTokens empty_tokens = EmptyTokens::defaults();
};

// GitHub-style pipe table. The first pipe row is the header; rows of only
// dashes/colons are dropped; short rows are padded and long rows truncated.
Table parse_markdown(std::string_view text, std::string_view intent, const ParseOptions& opts = {});

// Subset of HTML: table/thead/tbody/tfoot/tr/th/td with rowspan/colspan.
// Stacked header rows are flattened with " \u2014 " (space, em dash, space).
Table parse_html(std::string_view text, std::string_view intent, const ParseOptions& opts = {});

// Picks parse_html when the text contains a <table tag, markdown otherwise.
Table parse_table(std::string_view text, std::string_view intent, const ParseOptions& opts = {});

// Pipe table with a "---" delimiter row. Empty cells render as "NaN" and
// literal pipes are escaped.
std::string render_markdown(const Table& table);

inline constexpr std::string_view kHeaderJoin = " \xE2\x80\x94 ";

enum class RecordMode { pair, triple };

struct Record {
  RecordMode kind = RecordMode::pair;
  std::string row_key;
  std::string col_header;  // empty for pairs
  std::string value;

  // Fields joined by " | ".
  std::string joined() const;

  friend bool operator==(const Record&, const Record&) = default;
};

// Column 0 is the row header. Empty cells produce no record.
std::vector<Record> extract_records(const Table& table, RecordMode mode);

// Header label of column c, or "column <c+1>" when the label is blank.
std::string header_label(const Table& table, std::size_t c);

std::string_view to_string(RecordMode mode);
RecordMode record_mode_from_string(std::string_view s);

namespace detail {
// Cells of one pipe-table line; "\\|" is a literal pipe.
std::vector<std::string> split_pipe_row(std::string_view line);
}  // namespace detail

}  // namespace tabeval
