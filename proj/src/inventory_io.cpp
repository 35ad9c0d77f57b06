#include "sdrkit/inventory_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sdrkit/error.hpp"

namespace sdrkit {

namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

double parse_real(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("parse", context + ": '" + s + "' is not a number");
  }
}

int parse_int(const std::string& s, const std::string& context) {
  int v = 0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error("parse", context + ": '" + s + "' is not an integer");
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::size_t TsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error("parse", "missing column '" + name + "'");
}

bool TsvTable::has_column(const std::string& name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

TsvTable read_tsv(std::istream& in, const std::string& source_name) {
  TsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() < table.header.size()) fields.resize(table.header.size());
    if (fields.size() > table.header.size())
      throw Error("parse", where(source_name, lineno) + ": too many fields");
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(lineno);
  }
  return table;
}

TsvTable read_tsv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path.string());
  return read_tsv(in, path.string());
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char shorter[64];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

ItemPool load_item_pool(std::istream& in, const std::vector<std::string>& excluded_ids,
                        const std::string& source_name) {
  auto table = read_tsv(in, source_name);
  if (table.rows.empty()) throw Error("empty_pool", source_name + ": empty pool");
  const auto c_id = table.column("id"), c_text = table.column("text"),
             c_domain = table.column("domain"), c_key = table.column("keying");
  const bool has_sd = table.has_column("desirability");
  const auto c_sd = has_sd ? table.column("desirability") : 0;

  std::vector<Item> items;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto ctx = where(source_name, table.line_numbers[r]) + " (row " + std::to_string(r + 1) +
                     ", id '" + row[c_id] + "')";
    Item item;
    item.id = row[c_id];
    item.text = row[c_text];
    try {
      item.domain = parse_trait(row[c_domain]);
    } catch (const Error& e) {
      throw Error("unknown_domain", ctx + ": " + e.what());
    }
    const auto& key = row[c_key];
    if (key == "+" || key == "+1" || key == "1") {
      item.keying = 1;
    } else if (key == "-" || key == "-1") {
      item.keying = -1;
    } else {
      throw Error("invalid_keying", ctx + ": keying '" + key + "' is not +1 or -1");
    }
    if (has_sd && !row[c_sd].empty()) {
      double s = parse_real(row[c_sd], ctx);
      if (!(s >= 1.0 && s <= 9.0))
        throw Error("desirability_range", ctx + ": desirability outside [1, 9]");
      item.desirability = s;
    }
    items.push_back(std::move(item));
  }
  try {
    return ItemPool(std::move(items), excluded_ids);
  } catch (const Error& e) {
    throw Error(e.kind(), source_name + ": " + e.what());
  }
}

ItemPool load_item_pool(const std::filesystem::path& path,
                        const std::vector<std::string>& excluded_ids) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open item pool " + path.string());
  return load_item_pool(in, excluded_ids, path.string());
}

void save_item_pool(const ItemPool& pool, std::ostream& out) {
  out << "id\ttext\tdomain\tkeying\tdesirability\n";
  for (const auto& item : pool.items()) {
    out << item.id << '\t' << item.text << '\t' << trait_letter(item.domain) << '\t'
        << (item.keying > 0 ? "+1" : "-1") << '\t'
        << (item.desirability ? format_real(*item.desirability) : "") << '\n';
  }
}

std::vector<std::string> load_exclusions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open exclusions " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t");
    ids.push_back(line.substr(first, last - first + 1));
  }
  return ids;
}

Inventory load_inventory(std::istream& in, const std::string& source_name) {
  auto table = read_tsv(in, source_name);
  const auto c_left = table.column("left"), c_right = table.column("right"),
             c_gap = table.column("gap");
  std::vector<GfcBlock> blocks;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    blocks.push_back({row[c_left], row[c_right],
                      parse_real(row[c_gap], where(source_name, table.line_numbers[r]))});
  }
  return Inventory(std::move(blocks));
}

Inventory load_inventory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open inventory " + path.string());
  return load_inventory(in, path.string());
}

void save_inventory(const Inventory& inv, std::ostream& out) {
  out << "block\tleft\tright\tgap\n";
  for (std::size_t p = 0; p < inv.block_count(); ++p) {
    const auto& b = inv.blocks()[p];
    out << Inventory::block_id(p) << '\t' << b.left << '\t' << b.right << '\t'
        << format_real(b.desirability_gap) << '\n';
  }
}

std::vector<ResponseSet> load_response_sets(std::istream& in, const std::string& source_name) {
  auto table = read_tsv(in, source_name);
  const auto c_resp = table.column("respondent"), c_persona = table.column("persona"),
             c_format = table.column("format"), c_cond = table.column("condition"),
             c_unit = table.column("unit"), c_answer = table.column("answer"),
             c_flip = table.column("flipped"), c_complete = table.column("complete");
  std::vector<ResponseSet> sets;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto ctx = where(source_name, table.line_numbers[r]);
    auto format = parse_format(row[c_format]);
    auto cond = parse_condition(row[c_cond]);
    if (sets.empty() || sets.back().respondent_id != row[c_resp] ||
        sets.back().persona_id != row[c_persona] || sets.back().format != format ||
        sets.back().condition != cond) {
      ResponseSet rs;
      rs.respondent_id = row[c_resp];
      rs.persona_id = row[c_persona];
      rs.format = format;
      rs.condition = cond;
      rs.complete = row[c_complete] == "1";
      sets.push_back(std::move(rs));
    }
    auto& rs = sets.back();
    const auto& unit = row[c_unit];
    rs.presentation_order.push_back(unit);
    if (!row[c_answer].empty()) {
      int y = parse_int(row[c_answer], ctx);
      if (y < 1 || y > kCategoryCount) throw Error("answer_range", ctx + ": answer outside 1..7");
      rs.answers[unit] = y;
    }
    if (format == Format::Gfc) rs.side_flipped[unit] = row[c_flip] == "1";
  }
  return sets;
}

std::vector<ResponseSet> load_response_sets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open responses " + path.string());
  return load_response_sets(in, path.string());
}

void save_response_sets(const std::vector<ResponseSet>& sets, std::ostream& out) {
  out << "respondent\tpersona\tformat\tcondition\tposition\tunit\tanswer\tflipped\tcomplete\n";
  for (const auto& rs : sets) {
    for (std::size_t pos = 0; pos < rs.presentation_order.size(); ++pos) {
      const auto& unit = rs.presentation_order[pos];
      auto it = rs.answers.find(unit);
      bool flipped = false;
      if (auto f = rs.side_flipped.find(unit); f != rs.side_flipped.end()) flipped = f->second;
      out << rs.respondent_id << '\t' << rs.persona_id << '\t' << to_string(rs.format) << '\t'
          << to_string(rs.condition) << '\t' << pos + 1 << '\t' << unit << '\t'
          << (it == rs.answers.end() ? std::string() : std::to_string(it->second)) << '\t'
          << (flipped ? 1 : 0) << '\t' << (rs.complete ? 1 : 0) << '\n';
    }
  }
}

}  // namespace sdrkit
