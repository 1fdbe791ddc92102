#include "spg/background_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spg/error.hpp"

namespace spg {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_categories(std::span<const std::uint32_t> categories,
                      std::size_t k) {
  for (auto c : categories) {
    if (c >= k) {
      throw DimensionError("category " + std::to_string(c) +
                           " not below category count " + std::to_string(k));
    }
  }
}

struct BlockMoments {
  std::vector<double> degree;  // per vertex
  std::vector<double> m;       // k*k ordered endpoint counts
};

BlockMoments accumulate_moments(const Graph& g,
                                std::span<const std::uint32_t> categories,
                                std::size_t k) {
  if (g.directed()) {
    throw ConfigError("moment matching requires an undirected graph");
  }
  if (categories.size() != g.num_vertices()) {
    throw DimensionError("category labels do not match graph size");
  }
  BlockMoments bm;
  bm.degree.assign(g.num_vertices(), 0.0);
  bm.m.assign(k * k, 0.0);
  for (VertexId u = 0; u < g.num_vertices(); ++u) {
    auto nb = g.neighbors(u);
    auto ws = g.neighbor_weights(u);
    const std::size_t r = categories[u];
    for (std::size_t e = 0; e < nb.size(); ++e) {
      const double w = ws.empty() ? 1.0 : ws[e];
      bm.degree[u] += w;
      bm.m[r * k + categories[nb[e]]] += w;
    }
  }
  return bm;
}

LowRankExpectedModel model_from_moments(
    const BlockMoments& bm, std::span<const std::uint32_t> categories,
    std::size_t k) {
  std::vector<double> kappa(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < categories.size(); ++i) {
    kappa[categories[i]] += bm.degree[i];
    ++count[categories[i]];
  }
  for (std::size_t r = 0; r < k; ++r) {
    if (count[r] == 0) {
      throw ConfigError("category " + std::to_string(r) + " has no vertices");
    }
  }
  std::vector<double> omega(k * k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) {
      const double denom = kappa[r] * kappa[s];
      omega[r * k + s] = denom > 0.0 ? bm.m[r * k + s] / denom : 0.0;
    }
  }
  return LowRankExpectedModel::symmetric(
      bm.degree, {categories.begin(), categories.end()}, k, std::move(omega));
}

}  // namespace

double logistic_link(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double edge_probability(const GlmEdgeModel& model, std::span<const double> xi,
                        std::span<const double> xj,
                        std::span<const double> xij) {
  if (xi.size() != model.beta_source.size() ||
      xj.size() != model.beta_target.size() ||
      xij.size() != model.beta_pair.size()) {
    throw DimensionError("edge_probability: attribute dimension mismatch");
  }
  const double eta = dot(xi, model.beta_source) + dot(xj, model.beta_target) +
                     dot(xij, model.beta_pair);
  if (model.link == Link::Logistic) return logistic_link(eta);
  return std::min(1.0, std::exp(eta));
}

std::vector<double> category_pair_features(const VertexAttributes& attrs,
                                           VertexId i, VertexId j) {
  const std::size_t k = attrs.num_categories;
  std::vector<double> f(k * k, 0.0);
  f[attrs.categories.at(i) * k + attrs.categories.at(j)] = 1.0;
  return f;
}

LowRankExpectedModel::LowRankExpectedModel(std::vector<double> source,
                                           std::vector<double> target,
                                           std::vector<std::uint32_t> categories,
                                           std::size_t num_categories,
                                           std::vector<double> omega)
    : k_(num_categories),
      source_(std::move(source)),
      target_(std::move(target)),
      categories_(std::move(categories)),
      omega_(std::move(omega)) {
  if (source_.size() != categories_.size() ||
      target_.size() != categories_.size()) {
    throw DimensionError("propensity vectors do not match category labels");
  }
  if (omega_.size() != k_ * k_) {
    throw DimensionError("omega must be k x k");
  }
  check_categories(categories_, k_);
  for (double a : source_)
    if (!(a >= 0.0)) throw ConfigError("source propensities must be >= 0");
  for (double a : target_)
    if (!(a >= 0.0)) throw ConfigError("target propensities must be >= 0");
  for (double w : omega_)
    if (!(w >= 0.0)) throw ConfigError("omega entries must be >= 0");
}

LowRankExpectedModel LowRankExpectedModel::symmetric(
    std::vector<double> propensity, std::vector<std::uint32_t> categories,
    std::size_t num_categories, std::vector<double> omega) {
  auto target = propensity;
  return {std::move(propensity), std::move(target), std::move(categories),
          num_categories, std::move(omega)};
}

LowRankExpectedModel LowRankExpectedModel::zero(std::size_t n) {
  return symmetric(std::vector<double>(n, 0.0),
                   std::vector<std::uint32_t>(n, 0), 1, {0.0});
}

double LowRankExpectedModel::probability(VertexId i, VertexId j) const {
  if (i == j) return 0.0;
  return source_[i] * target_[j] * omega(categories_[i], categories_[j]);
}

bool LowRankExpectedModel::is_symmetric() const {
  if (source_ != target_) return false;
  for (std::size_t r = 0; r < k_; ++r)
    for (std::size_t s = r + 1; s < k_; ++s)
      if (omega(r, s) != omega(s, r)) return false;
  return true;
}

std::size_t LowRankExpectedModel::multiply_add(std::span<const double> x,
                                               std::span<double> y,
                                               double coeff) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) {
    throw DimensionError("expected_matvec: vector length does not match model");
  }
  // z = C^T diag(target) x  (k entries), then w = Omega z.
  std::vector<double> z(k_, 0.0), w(k_, 0.0);
  for (std::size_t j = 0; j < n; ++j) z[categories_[j]] += target_[j] * x[j];
  for (std::size_t r = 0; r < k_; ++r) {
    double acc = 0.0;
    for (std::size_t s = 0; s < k_; ++s) acc += omega_[r * k_ + s] * z[s];
    w[r] = acc;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = categories_[i];
    const double self = target_[i] * omega_[r * k_ + r] * x[i];
    y[i] += coeff * source_[i] * (w[r] - self);
  }
  return n * k_;
}

LowRankExpectedModel LowRankExpectedModel::scaled(double c) const {
  auto out = *this;
  for (double& w : out.omega_) w *= c;
  return out;
}

std::vector<double> expected_matvec(const LowRankExpectedModel& model,
                                    std::span<const double> x) {
  std::vector<double> y(model.size(), 0.0);
  model.multiply_add(x, y);
  return y;
}

LowRankExpectedModel lowrank_from_glm(const GlmEdgeModel& model,
                                      const VertexAttributes& attrs) {
  attrs.validate();
  const std::size_t k = attrs.num_categories;
  if (model.beta_source.size() != attrs.dimension ||
      model.beta_target.size() != attrs.dimension) {
    throw DimensionError("vertex weight vectors do not match attribute dimension");
  }
  if (model.beta_pair.size() != k * k) {
    throw DimensionError(
        "pair features are not one-hot over category pairs: expected " +
        std::to_string(k * k) + " pair weights, got " +
        std::to_string(model.beta_pair.size()));
  }
  const std::size_t n = attrs.size();
  std::vector<double> source(n), target(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = attrs.feature(static_cast<VertexId>(i));
    source[i] = std::exp(dot(x, model.beta_source));
    target[i] = std::exp(dot(x, model.beta_target));
  }
  std::vector<double> omega(k * k);
  for (std::size_t rs = 0; rs < k * k; ++rs) omega[rs] = std::exp(model.beta_pair[rs]);
  return {std::move(source), std::move(target), attrs.categories, k,
          std::move(omega)};
}

LowRankExpectedModel fit_moment_matching(
    const Graph& g, std::span<const std::uint32_t> categories,
    std::size_t num_categories) {
  check_categories(categories, num_categories);
  return model_from_moments(accumulate_moments(g, categories, num_categories),
                            categories, num_categories);
}

LowRankExpectedModel fit_moment_matching(
    const TemporalGraphSequence& seq, std::span<const std::uint32_t> categories,
    std::size_t num_categories) {
  check_categories(categories, num_categories);
  BlockMoments mean;
  mean.degree.assign(seq.num_vertices(), 0.0);
  mean.m.assign(num_categories * num_categories, 0.0);
  const double inv_t = 1.0 / static_cast<double>(seq.num_snapshots());
  for (const Graph& g : seq.snapshots()) {
    auto bm = accumulate_moments(g, categories, num_categories);
    for (std::size_t i = 0; i < bm.degree.size(); ++i)
      mean.degree[i] += inv_t * bm.degree[i];
    for (std::size_t rs = 0; rs < bm.m.size(); ++rs) mean.m[rs] += inv_t * bm.m[rs];
  }
  return model_from_moments(mean, categories, num_categories);
}

std::string model_to_json(const LowRankExpectedModel& model) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["alpha"] = std::vector<double>(model.source().begin(), model.source().end());
  if (!std::equal(model.source().begin(), model.source().end(),
                  model.target().begin())) {
    j["gamma"] =
        std::vector<double>(model.target().begin(), model.target().end());
  }
  j["categories"] = std::vector<std::uint32_t>(model.categories().begin(),
                                               model.categories().end());
  const std::size_t k = model.num_categories();
  auto omega = nlohmann::json::array();
  for (std::size_t r = 0; r < k; ++r) {
    std::vector<double> row(k);
    for (std::size_t s = 0; s < k; ++s) row[s] = model.omega(r, s);
    omega.push_back(row);
  }
  j["omega"] = omega;
  return j.dump();
}

LowRankExpectedModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  }
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw ParseError("unsupported model format_version", 0);
    }
    auto alpha = j.at("alpha").get<std::vector<double>>();
    auto gamma = j.contains("gamma") ? j["gamma"].get<std::vector<double>>()
                                     : alpha;
    auto cats = j.at("categories").get<std::vector<std::uint32_t>>();
    auto rows = j.at("omega").get<std::vector<std::vector<double>>>();
    const std::size_t k = rows.size();
    std::vector<double> omega;
    for (const auto& row : rows) {
      if (row.size() != k) throw DimensionError("omega must be square");
      omega.insert(omega.end(), row.begin(), row.end());
    }
    return {std::move(alpha), std::move(gamma), std::move(cats), k,
            std::move(omega)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  }
}

void save_model(const LowRankExpectedModel& model,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

LowRankExpectedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace spg
