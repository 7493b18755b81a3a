#include "gnnflow/bank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "gnnflow/error.hpp"
#include "gnnflow/rng.hpp"

namespace gnnflow {

using nlohmann::json;

void SplitSpec::validate() const {
  if (!(train_frac > 0.0 && val_frac > 0.0 && test_frac > 0.0)) {
    throw UsageError("split fractions must be positive");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw UsageError("split fractions must sum to 1");
  }
}

Partition split_dataset(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 3) throw DataError("need at least 3 items to split, got " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, 0x5eed5011ceULL));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[uniform_int(rng, 0, i)]);
  }
  // the epsilon absorbs representation error in products like 0.15 * 100
  const auto n_val = static_cast<std::size_t>(std::floor(spec.val_frac * static_cast<double>(n) + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(spec.test_frac * static_cast<double>(n) + 1e-9));
  const std::size_t n_train = n - n_val - n_test;

  Partition p;
  p.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  p.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
               perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  p.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  std::sort(p.train.begin(), p.train.end());
  std::sort(p.val.begin(), p.val.end());
  std::sort(p.test.begin(), p.test.end());
  return p;
}

const GbmModel& PredictorBank::model(std::uint32_t config_index) const {
  if (config_index >= models.size()) {
    throw DataError("bank has no model for config " + std::to_string(config_index));
  }
  return models[config_index];
}

void PredictorBank::check() const {
  if (models.size() != kConfigCount) {
    throw InvariantError("bank holds " + std::to_string(models.size()) + " models, expected 24");
  }
  for (const auto& m : models) {
    if (!(m.schema == schema)) throw InvariantError("bank models disagree on feature schema");
  }
}

std::size_t LabelIndex::find(std::string_view graph_id) const {
  for (std::size_t i = 0; i < graph_ids.size(); ++i) {
    if (graph_ids[i] == graph_id) return i;
  }
  throw DataError("no labels for graph '" + std::string(graph_id) + "'");
}

LabelIndex index_labels(const std::vector<LatencyRecord>& labels) {
  if (labels.empty()) throw DataError("label set is empty");
  LabelIndex idx;
  std::unordered_map<std::string, std::size_t> pos;
  std::vector<std::array<bool, kConfigCount>> seen;
  for (const auto& r : labels) {
    auto [it, fresh] = pos.try_emplace(r.graph_id, idx.graph_ids.size());
    if (fresh) {
      idx.graph_ids.push_back(r.graph_id);
      idx.cycles.push_back({});
      seen.push_back({});
    }
    const std::size_t g = it->second;
    if (r.config_index >= kConfigCount) throw DataError("config index out of range");
    if (seen[g][r.config_index]) {
      throw DataError("duplicate label for (" + r.graph_id + ", " + std::to_string(r.config_index) + ")");
    }
    seen[g][r.config_index] = true;
    idx.cycles[g][r.config_index] = r.cycles;
  }
  for (std::size_t g = 0; g < idx.graph_ids.size(); ++g) {
    for (std::uint32_t c = 0; c < kConfigCount; ++c) {
      if (!seen[g][c]) {
        throw DataError("missing label coverage at (" + idx.graph_ids[g] + ", " + std::to_string(c) + ")");
      }
    }
  }
  return idx;
}

BankTrainResult train_bank(const std::vector<LatencyRecord>& labels, const FeatureTable& features,
                           const TrainParams& params, const SplitSpec& split) {
  params.validate();
  const LabelIndex labels_by_graph = index_labels(labels);
  const std::size_t n_graphs = labels_by_graph.graph_ids.size();

  std::unordered_map<std::string, std::size_t> graph_pos;
  for (std::size_t g = 0; g < n_graphs; ++g) graph_pos.emplace(labels_by_graph.graph_ids[g], g);

  // row index per (graph, config)
  constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
  std::vector<std::array<std::size_t, kConfigCount>> feature_row(n_graphs);
  for (auto& a : feature_row) a.fill(kMissing);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto it = graph_pos.find(features.graph_ids[i]);
    if (it == graph_pos.end()) continue;
    feature_row[it->second][features.config_indices[i]] = i;
  }
  for (std::size_t g = 0; g < n_graphs; ++g) {
    for (std::uint32_t c = 0; c < kConfigCount; ++c) {
      if (feature_row[g][c] == kMissing) {
        throw DataError("missing features for (" + labels_by_graph.graph_ids[g] + ", " +
                        std::to_string(c) + ")");
      }
    }
  }

  const Partition part = split_dataset(n_graphs, split);
  const FeatureSchema schema = FeatureSchema::for_variant(features.variant);
  const std::size_t cols = features.cols();

  BankTrainResult result;
  PredictorBank& bank = result.bank;
  bank.schema = schema;
  bank.params = params;
  bank.split = split;
  for (std::size_t g : part.train) bank.partition.train.push_back(labels_by_graph.graph_ids[g]);
  for (std::size_t g : part.val) bank.partition.val.push_back(labels_by_graph.graph_ids[g]);
  for (std::size_t g : part.test) bank.partition.test.push_back(labels_by_graph.graph_ids[g]);
  bank.models.reserve(kConfigCount);

  double pooled = 0.0;
  std::size_t pooled_n = 0;
  std::vector<double> x;
  std::vector<double> y;
  for (std::uint32_t c = 0; c < kConfigCount; ++c) {
    x.clear();
    y.clear();
    for (std::size_t g : part.train) {
      const auto row = features.row(feature_row[g][c]);
      x.insert(x.end(), row.begin(), row.end());
      y.push_back(static_cast<double>(labels_by_graph.cycles[g][c]));
    }
    bank.models.push_back(train_gbm(schema, x, y, params));

    double err = 0.0;
    for (std::size_t g : part.val) {
      const double truth = static_cast<double>(labels_by_graph.cycles[g][c]);
      const double pred = bank.models.back().predict(features.row(feature_row[g][c]));
      err += std::abs(pred - truth) / truth;
    }
    result.validation.mape_percent[c] =
        part.val.empty() ? 0.0 : 100.0 * err / static_cast<double>(part.val.size());
    pooled += err;
    pooled_n += part.val.size();
  }
  (void)cols;
  result.validation.pooled_mape_percent = pooled_n ? 100.0 * pooled / static_cast<double>(pooled_n) : 0.0;
  result.validation.graph_count = part.val.size();
  return result;
}

namespace {

json tree_to_json(const RegressionTree& tree) {
  json flat = json::array();
  for (const auto& n : tree.nodes()) flat.push_back(json::array({n.feature, n.value}));
  return flat;
}

// Rebuilds right-child links from the pre-order encoding.
RegressionTree tree_from_json(const json& flat) {
  if (!flat.is_array() || flat.empty()) throw ParseError(0, "tree must be a non-empty array");
  std::vector<TreeNode> nodes;
  nodes.reserve(flat.size());
  for (const auto& entry : flat) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() ||
        !entry[1].is_number()) {
      throw ParseError(0, "tree node must be [feature_idx, value]");
    }
    nodes.push_back({entry[0].get<std::int32_t>(), entry[1].get<double>(), 0});
  }
  std::vector<std::size_t> pending;  // internal nodes whose right child is not yet placed
  std::size_t open_slots = 1;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (open_slots == 0) throw ParseError(0, "tree encoding has trailing nodes");
    --open_slots;
    if (!pending.empty() && i > 0 && nodes[i - 1].is_leaf()) {
      nodes[pending.back()].right = static_cast<std::uint32_t>(i);
      pending.pop_back();
    }
    if (!nodes[i].is_leaf()) {
      pending.push_back(i);
      open_slots += 2;
    }
  }
  if (open_slots != 0 || !pending.empty()) throw ParseError(0, "truncated tree encoding");
  return RegressionTree(std::move(nodes));
}

json ids_to_json(const std::vector<std::string>& ids) { return json(ids); }

}  // namespace

std::string save_bank(const PredictorBank& bank) {
  bank.check();
  json doc;
  doc["version"] = kBankVersion;
  doc["feature_schema"] = {{"variant", variant_name(bank.schema.variant)},
                           {"columns", bank.schema.columns}};
  doc["train_params"] = {{"tree_count", bank.params.tree_count},
                         {"learning_rate", bank.params.learning_rate},
                         {"max_depth", bank.params.max_depth},
                         {"min_leaf_samples", bank.params.min_leaf_samples},
                         {"log_target", bank.params.log_target},
                         {"seed", bank.params.seed}};
  doc["split"] = {{"train_frac", bank.split.train_frac},
                  {"val_frac", bank.split.val_frac},
                  {"test_frac", bank.split.test_frac},
                  {"seed", bank.split.seed},
                  {"train", ids_to_json(bank.partition.train)},
                  {"val", ids_to_json(bank.partition.val)},
                  {"test", ids_to_json(bank.partition.test)}};
  json models = json::array();
  for (std::uint32_t c = 0; c < bank.models.size(); ++c) {
    const auto& m = bank.models[c];
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    models.push_back({{"config_index", c},
                      {"base", m.base_prediction},
                      {"log_target", m.log_target},
                      {"learning_rate", m.learning_rate},
                      {"trees", std::move(trees)}});
  }
  doc["models"] = std::move(models);
  return doc.dump() + "\n";
}

PredictorBank load_bank(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed model bank: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("version")) throw ParseError(0, "model bank has no version");
    const auto version = doc.at("version").get<std::string>();
    if (version != kBankVersion) {
      throw DataError("unsupported model bank version '" + version + "' (expected " +
                      std::string(kBankVersion) + ")");
    }
    PredictorBank bank;
    const auto& schema = doc.at("feature_schema");
    bank.schema = FeatureSchema::for_variant(parse_variant(schema.at("variant").get<std::string>()));
    if (schema.at("columns").get<std::vector<std::string>>() != bank.schema.columns) {
      throw DataError("model bank columns do not match variant '" +
                      std::string(variant_name(bank.schema.variant)) + "'");
    }
    const auto& tp = doc.at("train_params");
    bank.params.tree_count = tp.at("tree_count").get<std::size_t>();
    bank.params.learning_rate = tp.at("learning_rate").get<double>();
    bank.params.max_depth = tp.at("max_depth").get<std::size_t>();
    bank.params.min_leaf_samples = tp.at("min_leaf_samples").get<std::size_t>();
    bank.params.log_target = tp.at("log_target").get<bool>();
    bank.params.seed = tp.at("seed").get<std::uint64_t>();
    const auto& sp = doc.at("split");
    bank.split.train_frac = sp.at("train_frac").get<double>();
    bank.split.val_frac = sp.at("val_frac").get<double>();
    bank.split.test_frac = sp.at("test_frac").get<double>();
    bank.split.seed = sp.at("seed").get<std::uint64_t>();
    bank.partition.train = sp.at("train").get<std::vector<std::string>>();
    bank.partition.val = sp.at("val").get<std::vector<std::string>>();
    bank.partition.test = sp.at("test").get<std::vector<std::string>>();

    const auto& models = doc.at("models");
    if (!models.is_array() || models.size() != kConfigCount) {
      throw DataError("model bank must hold exactly 24 models");
    }
    bank.models.resize(kConfigCount);
    std::array<bool, kConfigCount> seen{};
    for (const auto& jm : models) {
      const auto c = jm.at("config_index").get<std::uint32_t>();
      if (c >= kConfigCount || seen[c]) throw DataError("bad or duplicate config_index in bank");
      seen[c] = true;
      GbmModel& m = bank.models[c];
      m.schema = bank.schema;
      m.base_prediction = jm.at("base").get<double>();
      m.log_target = jm.at("log_target").get<bool>();
      m.learning_rate = jm.at("learning_rate").get<double>();
      for (const auto& jt : jm.at("trees")) {
        RegressionTree tree = tree_from_json(jt);
        for (const auto& n : tree.nodes()) {
          if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= bank.schema.columns.size()) {
            throw DataError("tree feature index outside schema");
          }
          if (!std::isfinite(n.value)) throw DataError("non-finite value in tree");
        }
        m.trees.push_back(std::move(tree));
      }
    }
    bank.check();
    return bank;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed model bank: ") + e.what());
  }
}

std::string write_validation_csv(const ValidationReport& report) {
  std::string out = "config_index,scheme,inter_phase,val_mape\n";
  for (std::uint32_t c = 0; c < kConfigCount; ++c) {
    const auto cfg = DataflowConfig::from_index(c);
    out += std::to_string(c) + "," + std::string(scheme_name(cfg.scheme)) + "," +
           std::string(inter_phase_name(cfg.inter_phase)) + "," +
           std::to_string(report.mape_percent[c]) + "\n";
  }
  return out;
}

}  // namespace gnnflow
