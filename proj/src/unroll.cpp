#include "tabeval/unroll.hpp"

#include <algorithm>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include "tabeval/error.hpp"
#include "tabeval/text.hpp"

namespace tabeval {

std::vector<std::string> StatementSet::texts() const {
  std::vector<std::string> out;
  out.reserve(statements.size());
  for (const auto& s : statements) out.push_back(s.text);
  return out;
}

bool is_row_unique(const Table& table, const std::vector<std::size_t>& columns) {
  std::set<std::vector<std::string>> seen;
  for (const auto& row : table.rows) {
    std::vector<std::string> key;
    key.reserve(columns.size());
    for (auto c : columns) key.push_back(row[c].text);
    if (!seen.insert(std::move(key)).second) return false;
  }
  return true;
}

namespace {

// Advances `idx` to the next k-combination of [0, n) in lexicographic order.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

AnchorChoice detect_anchor(const Table& table, std::size_t max_size) {
  const std::size_t n = table.num_cols();
  for (std::size_t k = 1; k <= std::min(max_size, n); ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    do {
      if (is_row_unique(table, idx)) return {idx, false};
    } while (next_combination(idx, n));
  }
  AnchorChoice all;
  for (std::size_t c = 0; c < n; ++c) all.column_indices.push_back(c);
  all.exhaustive = true;
  return all;
}

namespace {

std::string anchor_phrase(const Table& table, const std::vector<std::size_t>& anchor, std::size_t r) {
  if (anchor.size() == 1) {
    const auto& cell = table.at(r, anchor[0]);
    const auto label = header_label(table, anchor[0]);
    if (cell.is_empty) return "the row with no " + label;
    return "the " + label + " " + cell.text;
  }
  std::vector<std::string> parts;
  std::vector<std::string> labels;
  for (auto c : anchor) {
    labels.push_back(header_label(table, c));
    if (!table.at(r, c).is_empty) parts.push_back(labels.back() + " is " + table.at(r, c).text);
  }
  if (parts.empty()) return "the row with no " + text::join(labels, " and ");
  return "the row where " + text::join(parts, " and ");
}

std::string existence_statement(const std::string& intent, const std::string& phrase) {
  if (intent.empty()) return "There is " + phrase + ".";
  return "In " + intent + ", there is " + phrase + ".";
}

std::string fact_statement(const std::string& intent, const std::string& phrase, const std::string& header,
                           const std::string& value) {
  if (intent.empty()) return "For " + phrase + ", the " + header + " is " + value + ".";
  return "For " + phrase + " in " + intent + ", the " + header + " is " + value + ".";
}

}  // namespace

StatementSet unroll_deterministic(const Table& table, const DeterministicOptions& opts) {
  if (table.num_rows() == 0) throw EmptyTable("cannot unroll a table without rows");
  if (table.num_cols() == 0) throw EmptyTable("cannot unroll a table without columns");
  table.validate();

  const auto anchor = detect_anchor(table, opts.max_anchor_size);
  std::vector<bool> is_anchor(table.num_cols(), false);
  for (auto c : anchor.column_indices) is_anchor[c] = true;
  const auto intent = text::normalize_ws(table.intent);

  StatementSet out;
  out.source = StatementSource::deterministic;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const auto phrase = anchor_phrase(table, anchor.column_indices, r);
    const auto before = out.statements.size();
    if (anchor.column_indices.size() > 1)
      out.statements.push_back({existence_statement(intent, phrase), {r}});
    for (std::size_t c = 0; c < table.num_cols(); ++c) {
      if (is_anchor[c] || table.at(r, c).is_empty) continue;
      out.statements.push_back({fact_statement(intent, phrase, header_label(table, c), table.at(r, c).text), {r}});
    }
    if (out.statements.size() == before) out.statements.push_back({existence_statement(intent, phrase), {r}});
  }
  return out;
}

// --- response parsing -------------------------------------------------------

namespace {

enum class Heading { none, statements, rows, other };

std::string strip_decoration(std::string_view line) {
  std::string s = text::normalize_ws(line);
  auto is_deco = [](char c) { return c == '#' || c == '*' || c == '_' || c == ' '; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_deco(s[b])) ++b;
  while (e > b && is_deco(s[e - 1])) --e;
  return s.substr(b, e - b);
}

const std::regex& item_regex() {
  static const std::regex re(R"(^\s*(?:\d+[.)]|[-*]|•)\s+(.*)$)");
  return re;
}

Heading classify(std::string_view line, bool& is_item) {
  std::smatch m;
  std::string l(line);
  is_item = std::regex_match(l, m, item_regex());
  if (is_item) return Heading::none;
  auto s = text::to_lower(strip_decoration(line));
  // "**Statements:**" strips to "statements:"; trailing colon is optional for our own headings.
  if (s == "statements:" || s == "statements") return Heading::statements;
  if (s == "rows:" || s == "rows" || s == "supporting rows:") return Heading::rows;
  if (!s.empty() && s.back() == ':') return Heading::other;
  return Heading::none;
}

struct Sections {
  std::vector<std::string> statements;
  std::vector<std::string> rows;
  bool found_statements = false;
  bool found_rows = false;
};

Sections split_sections(std::string_view response) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(response)};
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  // The last Statements heading wins so echoed few-shot blocks are ignored.
  std::optional<std::size_t> start;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    bool item = false;
    if (classify(lines[i], item) == Heading::statements) start = i;
  }
  Sections out;
  if (!start) return out;
  out.found_statements = true;

  Heading section = Heading::statements;
  for (std::size_t i = *start + 1; i < lines.size(); ++i) {
    bool item = false;
    auto h = classify(lines[i], item);
    if (h == Heading::rows && !out.found_rows) {
      section = Heading::rows;
      out.found_rows = true;
      continue;
    }
    if (h == Heading::statements || h == Heading::rows || h == Heading::other) {
      section = Heading::other;
      continue;
    }
    if (section == Heading::other) continue;
    auto& target = section == Heading::statements ? out.statements : out.rows;
    if (item) {
      std::smatch m;
      std::string l = lines[i];
      std::regex_match(l, m, item_regex());
      auto body = text::normalize_ws(m[1].str());
      if (!body.empty()) target.push_back(body);
    } else {
      auto body = text::normalize_ws(lines[i]);
      if (body.empty()) continue;
      if (section == Heading::rows && body.find('|') != std::string::npos) target.push_back(body);
      else if (!target.empty()) target.back() += " " + body;
      else target.push_back(body);
    }
  }
  return out;
}

// Pulls "[1]", "[1, 2]", "[Row 3]", "[Rows 1-2]" citations out of a statement.
std::string strip_citations(const std::string& statement, std::vector<std::size_t>& cited) {
  static const std::regex cite(R"(\[\s*(?:rows?\s*)?(\d+(?:\s*(?:[,;&-]|and)\s*(?:rows?\s*)?\d+)*)\s*\])",
                               std::regex::icase);
  static const std::regex number(R"(\d+)");
  static const std::regex range(R"((\d+)\s*-\s*(\d+))");
  std::string out;
  auto begin = std::sregex_iterator(statement.begin(), statement.end(), cite);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out += statement.substr(last, m.position() - last);
    last = m.position() + m.length();
    std::string body = m[1].str();
    std::smatch rm;
    if (std::regex_match(body, rm, range)) {
      auto a = std::stoul(rm[1].str()), b = std::stoul(rm[2].str());
      for (auto k = a; k <= b && k - a < 1000; ++k) cited.push_back(k);
      continue;
    }
    for (auto nit = std::sregex_iterator(body.begin(), body.end(), number); nit != std::sregex_iterator(); ++nit)
      cited.push_back(std::stoul(nit->str()));
  }
  out += statement.substr(last);
  out = text::normalize_ws(out);
  // "... Germany [1]." leaves "Germany ." behind.
  for (std::string_view p : {" .", " ,", " ;", " :"}) {
    std::size_t pos;
    while ((pos = out.find(p)) != std::string::npos) out.erase(pos, 1);
  }
  return out;
}

std::vector<std::string> squashed_row(const std::vector<std::string>& cells) {
  std::vector<std::string> out;
  for (const auto& c : cells) {
    auto cell = Cell::from_raw(c);
    out.push_back(text::squash(cell.text));
  }
  return out;
}

std::vector<std::string> squashed_row(const std::vector<Cell>& cells) {
  std::vector<std::string> out;
  for (const auto& c : cells) out.push_back(text::squash(c.text));
  return out;
}

StatementSet parse_response_impl(std::string_view response, const Table* table) {
  auto sections = split_sections(response);
  if (!sections.found_statements) throw UnparseableResponse("response has no Statements section");

  // Listed row k -> table row index.
  std::vector<std::optional<std::size_t>> listed;
  if (table) {
    std::vector<std::vector<std::string>> table_rows;
    for (const auto& row : table->rows) table_rows.push_back(squashed_row(row));
    std::vector<bool> used(table_rows.size(), false);
    for (const auto& line : sections.rows) {
      auto cells = squashed_row(detail::split_pipe_row(line));
      std::optional<std::size_t> hit;
      for (std::size_t r = 0; r < table_rows.size(); ++r) {
        if (table_rows[r] != cells) continue;
        if (!hit) hit = r;
        if (!used[r]) {
          hit = r;
          break;
        }
      }
      if (hit) used[*hit] = true;
      listed.push_back(hit);
    }
  } else {
    listed.assign(sections.rows.size(), std::nullopt);
  }

  StatementSet out;
  out.source = StatementSource::llm;
  out.prompt_version = unroll_prompt_version();
  for (const auto& raw : sections.statements) {
    std::vector<std::size_t> cited;
    Statement st;
    st.text = strip_citations(raw, cited);
    if (st.text.empty()) continue;
    std::set<std::size_t> rows;
    if (!cited.empty()) {
      for (auto n : cited) {
        if (n == 0) continue;
        if (sections.found_rows) {
          if (n <= listed.size() && listed[n - 1]) rows.insert(*listed[n - 1]);
        } else if (!table || n <= table->num_rows()) {
          rows.insert(n - 1);
        }
      }
    } else if (table && sections.found_rows) {
      // Attribute to the listed rows sharing the most cell values with the statement.
      const auto hay = text::squash(st.text);
      std::size_t best = 0;
      for (const auto& idx : listed) {
        if (!idx) continue;
        std::size_t hits = 0;
        for (const auto& cell : table->rows[*idx]) {
          if (!cell.is_empty && hay.find(text::squash(cell.text)) != std::string::npos) ++hits;
        }
        if (hits == 0 || hits < best) continue;
        if (hits > best) rows.clear();
        best = hits;
        rows.insert(*idx);
      }
    }
    st.supporting_rows.assign(rows.begin(), rows.end());
    st.attribution_missing = st.supporting_rows.empty();
    out.statements.push_back(std::move(st));
  }
  return out;
}

}  // namespace

StatementSet parse_unroll_response(std::string_view response, const Table& table) {
  return parse_response_impl(response, &table);
}

StatementSet parse_unroll_response(std::string_view response) { return parse_response_impl(response, nullptr); }

// --- attribution -------------------------------------------------------------

namespace {

const std::set<std::string>& function_words() {
  static const std::set<std::string> words{
      "the",  "for",   "and",  "there", "where", "row",   "rows", "with", "column", "was",  "were", "are",
      "has",  "had",   "have", "its",   "his",   "her",   "their", "which", "who",   "whom", "from", "into",
      "than", "then",  "also", "been",  "being", "not",   "but",  "all",  "any",    "each", "this", "that",
      "these", "those", "what", "when",  "how",   "they",  "she",  "him",  "them",   "there", "here", "via",
  };
  return words;
}

}  // namespace

AttributionReport validate_attribution(const StatementSet& statements, const Table& table) {
  std::string hay = text::to_lower(table.intent);
  for (const auto& h : table.column_headers) hay += " " + text::to_lower(h);
  for (const auto& row : table.rows)
    for (const auto& cell : row) hay += " " + text::to_lower(cell.text);

  AttributionReport report;
  for (std::size_t i = 0; i < statements.statements.size(); ++i) {
    const auto& st = statements.statements[i];
    UnsupportedStatement flag;
    flag.index = i;
    for (const auto& tok : text::word_tokens(st.text)) {
      if (tok.size() < 3 || function_words().count(tok)) continue;
      if (hay.find(tok) == std::string::npos) flag.missing_tokens.push_back(tok);
    }
    for (auto r : st.supporting_rows)
      if (r >= table.num_rows()) flag.bad_rows.push_back(r);
    if (!flag.missing_tokens.empty() || !flag.bad_rows.empty()) report.flagged.push_back(std::move(flag));
  }
  return report;
}

StatementSet drop_unsupported(const StatementSet& statements, const AttributionReport& report) {
  std::set<std::size_t> drop;
  for (const auto& f : report.flagged) drop.insert(f.index);
  StatementSet out = statements;
  out.statements.clear();
  for (std::size_t i = 0; i < statements.statements.size(); ++i)
    if (!drop.count(i)) out.statements.push_back(statements.statements[i]);
  return out;
}

}  // namespace tabeval
