#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spg/graph.hpp"

namespace spg {

enum class Link { Logistic, Exponential };

/// Generalized linear edge model: p_ij = g(x_i.b_src + x_j.b_dst + x_ij.b_pair).
struct GlmEdgeModel {
  std::vector<double> beta_source;
  std::vector<double> beta_target;
  std::vector<double> beta_pair;
  Link link = Link::Logistic;
};

double logistic_link(double x);

/// Evaluates the model for one ordered pair. The exponential link is clamped
/// to [0, 1]. Throws DimensionError on mismatched vector lengths.
double edge_probability(const GlmEdgeModel& model, std::span<const double> xi,
                        std::span<const double> xj, std::span<const double> xij);

/// One-hot category-pair feature for (i, j): index c(i) * k + c(j).
std::vector<double> category_pair_features(const VertexAttributes& attrs,
                                           VertexId i, VertexId j);

/// Degree-corrected blockmodel form of E[A]:
///   p_ij = source_i * target_j * omega[c(i), c(j)]   (i != j)
///
/// Probabilities are not clamped here; samplers clamp at draw time.
class LowRankExpectedModel {
 public:
  LowRankExpectedModel() = default;
  LowRankExpectedModel(std::vector<double> source, std::vector<double> target,
                       std::vector<std::uint32_t> categories,
                       std::size_t num_categories, std::vector<double> omega);

  /// Undirected convenience: target = source.
  static LowRankExpectedModel symmetric(std::vector<double> propensity,
                                        std::vector<std::uint32_t> categories,
                                        std::size_t num_categories,
                                        std::vector<double> omega);

  /// All-zero model (E[A] = 0) on n vertices.
  static LowRankExpectedModel zero(std::size_t n);

  std::size_t size() const noexcept { return categories_.size(); }
  std::size_t num_categories() const noexcept { return k_; }
  std::span<const double> source() const noexcept { return source_; }
  std::span<const double> target() const noexcept { return target_; }
  std::span<const std::uint32_t> categories() const noexcept {
    return categories_;
  }
  double omega(std::size_t r, std::size_t s) const { return omega_[r * k_ + s]; }
  std::span<const double> omega() const noexcept { return omega_; }

  /// Unclamped p_ij; 0 on the diagonal.
  double probability(VertexId i, VertexId j) const;
  /// source == target and omega symmetric.
  bool is_symmetric() const;

  /// y += coeff * E[A] x, in O(n k + k^2). Self-pairs contribute zero.
  /// Returns the work in units of n * k.
  std::size_t multiply_add(std::span<const double> x, std::span<double> y,
                    double coeff = 1.0) const;

  /// Same model with omega multiplied by c.
  LowRankExpectedModel scaled(double c) const;

  friend bool operator==(const LowRankExpectedModel&,
                         const LowRankExpectedModel&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> source_;
  std::vector<double> target_;
  std::vector<std::uint32_t> categories_;
  std::vector<double> omega_;
};

/// Returns E[A] x.
std::vector<double> expected_matvec(const LowRankExpectedModel& model,
                                    std::span<const double> x);

/// Exponential-link factorization. beta_pair must hold one weight per ordered
/// category pair (k * k entries, index r * k + s), matching
/// category_pair_features().
LowRankExpectedModel lowrank_from_glm(const GlmEdgeModel& model,
                                      const VertexAttributes& attrs);

/// Degree-corrected blockmodel moment estimates on an undirected graph:
///   omega_rs = m_rs / (kappa_r kappa_s),  source_i = target_i = d_i,
/// with m_rs the ordered edge-endpoint count between blocks (diagonal
/// doubled) and kappa_r the block degree total. Weighted graphs use weighted
/// degrees. Zero-degree blocks give omega = 0.
LowRankExpectedModel fit_moment_matching(const Graph& g,
                                         std::span<const std::uint32_t> categories,
                                         std::size_t num_categories);

/// Shared model for a sequence: moments averaged over snapshots.
LowRankExpectedModel fit_moment_matching(const TemporalGraphSequence& seq,
                                         std::span<const std::uint32_t> categories,
                                         std::size_t num_categories);

// JSON: {"format_version":1,"alpha":[],"gamma":[] (directed only),
//        "categories":[],"omega":[[]]}
std::string model_to_json(const LowRankExpectedModel& model);
LowRankExpectedModel model_from_json(const std::string& text);
void save_model(const LowRankExpectedModel& model,
                const std::filesystem::path& path);
LowRankExpectedModel load_model(const std::filesystem::path& path);

}  // namespace spg
