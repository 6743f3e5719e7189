#include "liptree/table_cache.hpp"

#include <fstream>
#include <sstream>

namespace liptree {

nlohmann::json tables_to_json(std::span<const LevelTable> tables) {
  if (tables.empty()) throw std::invalid_argument("no tables to serialize");
  const LevelTable& first = tables.front();
  const ModelParams& params = first.params();
  nlohmann::json levels = nlohmann::json::array();
  for (const LevelTable& table : tables) {
    nlohmann::json level = {{"level", table.level()}};
    nlohmann::json weights = nlohmann::json::array();
    if (table.backend() == Backend::Exact) {
      for (const mpz_class& w : table.exact_weights()) weights.push_back(w.get_str());
    } else {
      level["normalizer_log"] = table.normalizer();
      for (double w : table.log_weights()) weights.push_back(w);
    }
    level["weights_t0_to_jM"] = std::move(weights);
    levels.push_back(std::move(level));
  }
  return {{"format_version", kTableFormatVersion},
          {"d", params.branching()},
          {"M", params.lipschitz()},
          {"k", params.depth()},
          {"backend", to_string(first.backend())},
          {"levels", std::move(levels)}};
}

std::vector<LevelTable> tables_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kTableFormatVersion) {
      throw CacheFormatError("unsupported table format_version " + std::to_string(version));
    }
    const ModelParams params(doc.at("d").get<int>(), doc.at("M").get<int>(),
                             doc.at("k").get<int>());
    const Backend backend = parse_backend(doc.at("backend").get<std::string>());
    const auto& levels = doc.at("levels");
    if (!levels.is_array() || levels.size() != static_cast<std::size_t>(params.depth())) {
      throw CacheFormatError("expected " + std::to_string(params.depth()) + " levels");
    }
    std::vector<LevelTable> tables;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& level = levels[i];
      const int j = level.at("level").get<int>();
      if (j != static_cast<int>(i) + 1) {
        throw CacheFormatError("levels out of order at position " + std::to_string(i));
      }
      const auto& weights = level.at("weights_t0_to_jM");
      if (backend == Backend::Exact) {
        std::vector<mpz_class> values;
        for (const auto& w : weights) values.emplace_back(w.get<std::string>(), 10);
        tables.push_back(LevelTable::from_exact(params, j, std::move(values)));
      } else {
        std::vector<double> values;
        for (const auto& w : weights) values.push_back(w.get<double>());
        tables.push_back(LevelTable::from_log(params, j, std::move(values),
                                              level.at("normalizer_log").get<double>()));
      }
    }
    return tables;
  } catch (const nlohmann::json::exception& e) {
    throw CacheFormatError(std::string("malformed table document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CacheFormatError(std::string("invalid table document: ") + e.what());
  }
}

std::string cache_file_name(const ModelParams& params, Backend backend) {
  std::ostringstream os;
  os << "tables_d" << params.branching() << "_M" << params.lipschitz() << "_k"
     << params.depth() << "_" << to_string(backend) << "_v" << kTableFormatVersion << ".json";
  return os.str();
}

void write_tables(const std::filesystem::path& path, std::span<const LevelTable> tables) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << tables_to_json(tables).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<LevelTable> read_tables(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CacheFormatError(path.string() + ": " + e.what());
  }
  return tables_from_json(doc);
}

std::optional<std::vector<LevelTable>> load_cached_tables(const std::filesystem::path& path,
                                                          const ModelParams& params,
                                                          Backend backend) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CacheFormatError(path.string() + ": " + e.what());
  }
  // Stale versions are ignored, never migrated.
  if (!doc.is_object() || doc.value("format_version", -1) != kTableFormatVersion) {
    return std::nullopt;
  }
  auto tables = tables_from_json(doc);
  if (!(tables.front().params() == params) || tables.front().backend() != backend) {
    return std::nullopt;
  }
  return tables;
}

}  // namespace liptree
