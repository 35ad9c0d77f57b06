#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdrkit/inventory.hpp"

namespace sdrkit {

/// Tab-separated table with a mandatory header row. Blank lines and lines
/// starting with '#' are skipped.
struct TsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  ///< 1-based source line of each row

  std::size_t column(const std::string& name) const;  ///< throws when absent
  bool has_column(const std::string& name) const;
};

TsvTable read_tsv(std::istream& in, const std::string& source_name = "<stream>");
TsvTable read_tsv_file(const std::filesystem::path& path);
std::vector<std::string> split(std::string_view line, char sep);

/// Item pool file: columns id, text, domain, keying[, desirability].
ItemPool load_item_pool(std::istream& in, const std::vector<std::string>& excluded_ids = {},
                        const std::string& source_name = "<stream>");
ItemPool load_item_pool(const std::filesystem::path& path,
                        const std::vector<std::string>& excluded_ids = {});
void save_item_pool(const ItemPool& pool, std::ostream& out);

/// Exclusion sidecar: one item id per line.
std::vector<std::string> load_exclusions(const std::filesystem::path& path);

/// Inventory file: columns block, left, right, gap.
Inventory load_inventory(std::istream& in, const std::string& source_name = "<stream>");
Inventory load_inventory(const std::filesystem::path& path);
void save_inventory(const Inventory& inv, std::ostream& out);

/// Response file: one row per answered unit; several sets per file.
std::vector<ResponseSet> load_response_sets(std::istream& in,
                                            const std::string& source_name = "<stream>");
std::vector<ResponseSet> load_response_sets(const std::filesystem::path& path);
void save_response_sets(const std::vector<ResponseSet>& sets, std::ostream& out);

/// Full-precision decimal rendering used by every writer.
std::string format_real(double v);

}  // namespace sdrkit
