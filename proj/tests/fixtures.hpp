#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include "sdrkit/inventory_io.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return SDRKIT_DATA_DIR; }

inline sdrkit::ItemPool table3_pool() { return sdrkit::load_item_pool(data_dir() / "table3_pool.tsv"); }
inline sdrkit::Inventory table3_inventory() {
  return sdrkit::load_inventory(data_dir() / "table3_inventory.tsv");
}

/// Fresh scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("sdrkit_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
