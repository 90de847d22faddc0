#include "tabeval/table.hpp"

#include <algorithm>
#include <sstream>

#include "tabeval/error.hpp"
#include "tabeval/text.hpp"

namespace tabeval {

bool EmptyTokens::matches(std::string_view normalized) const {
  if (normalized.empty()) return true;
  return tokens.count(text::to_lower(normalized)) > 0;
}

const EmptyTokens& EmptyTokens::defaults() {
  static const EmptyTokens instance;
  return instance;
}

Cell Cell::from_raw(std::string_view raw, const EmptyTokens& empties) {
  auto norm = text::normalize_ws(raw);
  if (empties.matches(norm)) return Cell{};
  return Cell{std::move(norm), false};
}

void Table::validate() const {
  if (column_headers.empty()) throw MalformedTable("table has no columns");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != column_headers.size())
      throw MalformedTable("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                           " cells, expected " + std::to_string(column_headers.size()));
  }
}

namespace {

std::string_view trim(std::string_view s) {
  auto is_sp = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_sp(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_sp(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

// Splits on unescaped pipes; leading and trailing pipes are optional.
std::vector<std::string> detail::split_pipe_row(std::string_view line) {
  line = trim(line);
  std::vector<std::string> cells;
  std::string cur;
  bool any_pipe = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
      cur.push_back('|');
      ++i;
    } else if (c == '|') {
      cells.push_back(std::move(cur));
      cur.clear();
      any_pipe = true;
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  if (any_pipe && line.front() == '|') cells.erase(cells.begin());
  // A trailing unescaped pipe leaves an empty final field.
  if (any_pipe && cells.size() > 0 && line.back() == '|' &&
      !(line.size() >= 2 && line[line.size() - 2] == '\\'))
    cells.pop_back();
  return cells;
}

namespace {

bool has_unescaped_pipe(std::string_view line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\') {
      ++i;
      continue;
    }
    if (line[i] == '|') return true;
  }
  return false;
}

bool is_delimiter_row(const std::vector<std::string>& cells) {
  bool any = false;
  for (const auto& raw : cells) {
    auto c = trim(raw);
    if (c.empty()) continue;
    if (c.front() == ':') c.remove_prefix(1);
    if (!c.empty() && c.back() == ':') c.remove_suffix(1);
    if (c.empty() || c.find_first_not_of('-') != std::string_view::npos) return false;
    any = true;
  }
  return any;
}

}  // namespace

Table parse_markdown(std::string_view text, std::string_view intent, const ParseOptions& opts) {
  std::vector<std::vector<std::string>> block;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (has_unescaped_pipe(line)) {
      block.push_back(detail::split_pipe_row(line));
    } else if (!block.empty()) {
      break;
    }
  }
  if (block.empty()) throw MalformedTable("no pipe-delimited row found");

  Table t;
  t.intent = text::normalize_ws(intent);
  t.source_format = SourceFormat::markdown;
  for (const auto& h : block.front()) {
    auto norm = text::normalize_ws(h);
    t.column_headers.push_back(norm);
  }
  bool all_empty = std::all_of(t.column_headers.begin(), t.column_headers.end(),
                               [](const std::string& h) { return h.empty(); });
  if (all_empty) throw MalformedTable("header row is empty");

  const auto width = t.column_headers.size();
  for (std::size_t i = 1; i < block.size(); ++i) {
    const auto& raw = block[i];
    if (is_delimiter_row(raw)) continue;
    std::vector<Cell> row;
    row.reserve(width);
    for (std::size_t c = 0; c < width; ++c)
      row.push_back(c < raw.size() ? Cell::from_raw(raw[c], opts.empty_tokens) : Cell{});
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table parse_table(std::string_view text, std::string_view intent, const ParseOptions& opts) {
  if (text::to_lower(text).find("<table") != std::string::npos) return parse_html(text, intent, opts);
  return parse_markdown(text, intent, opts);
}

namespace {

std::string escape_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out.push_back(c);
  }
  return out;
}

}  // namespace

std::string render_markdown(const Table& table) {
  std::string out = "|";
  for (const auto& h : table.column_headers) out += escape_cell(h) + "|";
  out += "\n|";
  for (std::size_t c = 0; c < table.num_cols(); ++c) out += "---|";
  for (const auto& row : table.rows) {
    out += "\n|";
    for (const auto& cell : row) out += (cell.is_empty ? std::string("NaN") : escape_cell(cell.text)) + "|";
  }
  return out;
}

std::string Record::joined() const {
  if (kind == RecordMode::pair) return row_key + " | " + value;
  return row_key + " | " + col_header + " | " + value;
}

std::vector<Record> extract_records(const Table& table, RecordMode mode) {
  std::vector<Record> out;
  for (const auto& row : table.rows) {
    const auto& key = row.empty() ? std::string() : row[0].text;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c].is_empty) continue;
      Record rec;
      rec.kind = mode;
      rec.row_key = key;
      if (mode == RecordMode::triple) rec.col_header = header_label(table, c);
      rec.value = row[c].text;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::string header_label(const Table& table, std::size_t c) {
  const auto& h = table.column_headers[c];
  return h.empty() ? "column " + std::to_string(c + 1) : h;
}

std::string_view to_string(RecordMode mode) { return mode == RecordMode::pair ? "pair" : "triple"; }

RecordMode record_mode_from_string(std::string_view s) {
  if (s == "pair") return RecordMode::pair;
  if (s == "triple") return RecordMode::triple;
  throw ConfigError("unknown record mode: " + std::string(s));
}

}  // namespace tabeval
