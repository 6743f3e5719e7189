// Versioned JSON documents holding level tables:
//   {format_version, d, M, k, backend,
//    levels: [{level, normalizer_log (log only), weights_t0_to_jM: [...]}]}
// Exact weights are decimal strings; log weights are round-trip doubles.

#ifndef LIPTREE_TABLE_CACHE_HPP
#define LIPTREE_TABLE_CACHE_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "liptree/model.hpp"

namespace liptree {

inline constexpr int kTableFormatVersion = 1;

class CacheFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json tables_to_json(std::span<const LevelTable> tables);

/// Throws CacheFormatError on structural problems (missing fields, wrong
/// lengths, unknown version). Weight values are taken as written.
std::vector<LevelTable> tables_from_json(const nlohmann::json& doc);

/// tables_d<d>_M<M>_k<k>_<backend>_v<version>.json
std::string cache_file_name(const ModelParams& params, Backend backend);

void write_tables(const std::filesystem::path& path, std::span<const LevelTable> tables);
std::vector<LevelTable> read_tables(const std::filesystem::path& path);

/// Tables stored at path if it exists and matches params, backend and the
/// current format version; std::nullopt otherwise.
std::optional<std::vector<LevelTable>> load_cached_tables(const std::filesystem::path& path,
                                                          const ModelParams& params,
                                                          Backend backend);

}  // namespace liptree

#endif  // LIPTREE_TABLE_CACHE_HPP
