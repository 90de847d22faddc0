#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <unordered_map>

#include "tabeval/error.hpp"
#include "tabeval/table.hpp"
#include "tabeval/text.hpp"

namespace tabeval {

namespace {

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  static const std::unordered_map<std::string_view, char32_t> named{
      {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},    {"apos", '\''},
      {"nbsp", 0xA0},   {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"copy", 0xA9},
      {"reg", 0xAE},    {"deg", 0xB0},    {"times", 0xD7},  {"minus", 0x2212}, {"middot", 0xB7},
      {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"eacute", 0xE9},
  };
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    auto name = s.substr(i + 1, semi - i - 1);
    std::optional<char32_t> cp;
    if (!name.empty() && name[0] == '#') {
      try {
        bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
        auto digits = std::string(name.substr(hex ? 2 : 1));
        if (!digits.empty()) cp = static_cast<char32_t>(std::stoul(digits, nullptr, hex ? 16 : 10));
      } catch (const std::exception&) {
      }
    } else if (auto it = named.find(name); it != named.end()) {
      cp = it->second;
    }
    if (!cp) {
      out.push_back('&');
      continue;
    }
    append_utf8(out, *cp);
    i = semi;
  }
  return out;
}

struct Tag {
  std::string name;  // lowercase
  bool closing = false;
  std::unordered_map<std::string, std::string> attrs;
};

// Parses the tag starting at s[pos] == '<'; pos is advanced past '>'.
Tag read_tag(std::string_view s, std::size_t& pos) {
  Tag tag;
  std::size_t i = pos + 1;
  if (i < s.size() && s[i] == '/') {
    tag.closing = true;
    ++i;
  }
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-'))
    tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++]))));
  while (i < s.size() && s[i] != '>') {
    if (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == '/') {
      ++i;
      continue;
    }
    std::string key;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '=' &&
           s[i] != '>' && s[i] != '/')
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++]))));
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::string value;
    if (i < s.size() && s[i] == '=') {
      ++i;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        char q = s[i++];
        while (i < s.size() && s[i] != q) value.push_back(s[i++]);
        if (i < s.size()) ++i;
      } else {
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '>')
          value.push_back(s[i++]);
      }
    }
    if (!key.empty()) tag.attrs.emplace(std::move(key), decode_entities(value));
  }
  pos = i < s.size() ? i + 1 : s.size();
  return tag;
}

int span_attr(const Tag& tag, const char* name) {
  auto it = tag.attrs.find(name);
  if (it == tag.attrs.end()) return 1;
  try {
    int v = std::stoi(it->second);
    return v >= 1 ? std::min(v, 1000) : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

struct RawCell {
  bool header = false;
  int rowspan = 1;
  int colspan = 1;
  std::string text;
};

struct RawRow {
  bool in_thead = false;
  std::vector<RawCell> cells;
};

bool is_block_tag(const std::string& n) {
  return n == "br" || n == "p" || n == "div" || n == "li" || n == "ul" || n == "ol" || n == "hr";
}

std::vector<RawRow> scan_rows(std::string_view s) {
  std::vector<RawRow> rows;
  bool in_table = false, done = false, in_thead = false, in_caption = false;
  bool row_open = false, cell_open = false;

  auto close_cell = [&] { cell_open = false; };
  auto close_row = [&] {
    close_cell();
    row_open = false;
  };

  std::size_t pos = 0;
  while (pos < s.size() && !done) {
    if (s[pos] != '<') {
      auto next = s.find('<', pos);
      if (next == std::string_view::npos) next = s.size();
      if (cell_open && !in_caption) rows.back().cells.back().text += decode_entities(s.substr(pos, next - pos));
      pos = next;
      continue;
    }
    if (s.compare(pos, 4, "<!--") == 0) {
      auto end = s.find("-->", pos + 4);
      pos = end == std::string_view::npos ? s.size() : end + 3;
      continue;
    }
    if (pos + 1 < s.size() && (s[pos + 1] == '!' || s[pos + 1] == '?')) {
      auto end = s.find('>', pos);
      pos = end == std::string_view::npos ? s.size() : end + 1;
      continue;
    }
    if (pos + 1 >= s.size() ||
        !(std::isalpha(static_cast<unsigned char>(s[pos + 1])) || s[pos + 1] == '/')) {
      if (cell_open) rows.back().cells.back().text.push_back('<');
      ++pos;
      continue;
    }
    Tag tag = read_tag(s, pos);
    if (!tag.closing && (tag.name == "script" || tag.name == "style")) {
      auto end = text::to_lower(s.substr(pos)).find("</" + tag.name);
      pos = end == std::string::npos ? s.size() : pos + end;
      continue;
    }
    if (!in_table) {
      if (tag.name == "table" && !tag.closing) in_table = true;
      continue;
    }
    if (tag.name == "table") {
      if (!tag.closing) throw MalformedTable("nested tables are not supported");
      done = true;
      continue;
    }
    if (tag.name == "caption") {
      in_caption = !tag.closing;
    } else if (tag.name == "thead" || tag.name == "tbody" || tag.name == "tfoot") {
      close_row();
      in_thead = !tag.closing && tag.name == "thead";
    } else if (tag.name == "tr") {
      close_row();
      if (!tag.closing) {
        rows.push_back(RawRow{in_thead, {}});
        row_open = true;
      }
    } else if (tag.name == "td" || tag.name == "th") {
      close_cell();
      if (!tag.closing) {
        if (!row_open) {
          rows.push_back(RawRow{in_thead, {}});
          row_open = true;
        }
        rows.back().cells.push_back(
            RawCell{tag.name == "th", span_attr(tag, "rowspan"), span_attr(tag, "colspan"), {}});
        cell_open = true;
      }
    } else if (cell_open && is_block_tag(tag.name)) {
      rows.back().cells.back().text.push_back(' ');
    }
  }
  if (!in_table) throw MalformedTable("no <table> element found");
  return rows;
}

}  // namespace

Table parse_html(std::string_view text, std::string_view intent, const ParseOptions& opts) {
  auto raw = scan_rows(text);
  if (raw.empty()) throw MalformedTable("table has no rows");

  std::size_t nrows = raw.size();
  std::vector<std::vector<std::optional<std::string>>> grid(nrows);
  std::size_t width = 0;
  for (std::size_t r = 0; r < nrows; ++r) {
    std::size_t c = 0;
    for (const auto& cell : raw[r].cells) {
      while (c < grid[r].size() && grid[r][c]) ++c;
      auto value = text::normalize_ws(cell.text);
      auto last_row = std::min(nrows, r + static_cast<std::size_t>(cell.rowspan));
      for (std::size_t rr = r; rr < last_row; ++rr) {
        auto& line = grid[rr];
        if (line.size() < c + cell.colspan) line.resize(c + cell.colspan);
        for (std::size_t cc = c; cc < c + cell.colspan; ++cc) {
          if (line[cc]) throw MalformedTable("overlapping cell spans");
          line[cc] = value;
        }
      }
      c += cell.colspan;
    }
  }
  // A <tr> without cells is still a grid row when spans cover it.
  {
    std::size_t kept = 0;
    for (std::size_t r = 0; r < nrows; ++r) {
      if (grid[r].empty()) continue;
      if (kept != r) {
        raw[kept] = std::move(raw[r]);
        grid[kept] = std::move(grid[r]);
      }
      ++kept;
    }
    raw.resize(kept);
    grid.resize(kept);
    nrows = kept;
  }
  if (nrows == 0) throw MalformedTable("table has no cells");
  for (const auto& line : grid) width = std::max(width, line.size());

  std::size_t header_rows = 0;
  while (header_rows < nrows && raw[header_rows].in_thead) ++header_rows;
  if (header_rows == 0) {
    auto all_th = [](const RawRow& row) {
      return !row.cells.empty() &&
             std::all_of(row.cells.begin(), row.cells.end(), [](const RawCell& c) { return c.header; });
    };
    while (header_rows < nrows && all_th(raw[header_rows])) ++header_rows;
    if (header_rows == 0 || header_rows == nrows) header_rows = 1;
  }

  Table t;
  t.intent = text::normalize_ws(intent);
  t.source_format = SourceFormat::html;
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < header_rows; ++r) {
      if (c >= grid[r].size() || !grid[r][c] || grid[r][c]->empty()) continue;
      if (!labels.empty() && labels.back() == *grid[r][c]) continue;
      labels.push_back(*grid[r][c]);
    }
    t.column_headers.push_back(text::join(labels, kHeaderJoin));
  }
  if (width == 0) throw MalformedTable("table has no columns");

  for (std::size_t r = header_rows; r < nrows; ++r) {
    std::vector<Cell> row;
    row.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (c < grid[r].size() && grid[r][c]) row.push_back(Cell::from_raw(*grid[r][c], opts.empty_tokens));
      else row.push_back(Cell{});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace tabeval
