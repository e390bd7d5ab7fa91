#pragma once

// Real-coded genetic algorithm: bounded maximization with binary tournament
// selection, arithmetic blend crossover, uniform mutation and elitism.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sfga/random.hpp"

namespace sfga {

/// Decision vector: a point of the search box or a set of spline coefficients.
using Candidate = std::vector<double>;

struct SearchBox {
  std::vector<double> lower;
  std::vector<double> upper;

  SearchBox() = default;
  SearchBox(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
    validate();
  }

  /// Same interval [lo, hi] in every one of `dim` coordinates.
  static SearchBox cube(std::size_t dim, double lo, double hi) {
    return SearchBox(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
  }

  std::size_t dim() const noexcept { return lower.size(); }

  void validate() const {
    if (lower.size() != upper.size()) throw std::invalid_argument("SearchBox: bound dimensions differ");
    if (lower.empty()) throw std::invalid_argument("SearchBox: zero dimensions");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i])) {
        throw std::invalid_argument("SearchBox: lower[" + std::to_string(i) + "] must be < upper");
      }
    }
  }

  bool contains(std::span<const double> x) const noexcept {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
  }

  void clip(std::span<double> x) const noexcept {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
};

struct GaConfig {
  std::size_t population_size = 80;
  std::size_t generations = 100;
  double crossover_prob = 0.5;
  double mutation_prob = 0.025;
  std::size_t elite_count = 2;
  std::uint64_t seed = 0;
  /// Blend weights are drawn from U(-ext, 1 + ext).
  double blend_extension = 0.1;
  /// Worker threads for fitness evaluation; results are identical for any value.
  unsigned threads = 1;

  void validate() const {
    if (population_size == 0) throw std::invalid_argument("GaConfig: population_size must be positive");
    if (elite_count >= population_size) throw std::invalid_argument("GaConfig: elite_count must be < population_size");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw std::invalid_argument("GaConfig: crossover_prob outside [0,1]");
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw std::invalid_argument("GaConfig: mutation_prob outside [0,1]");
    if (!(blend_extension >= 0.0)) throw std::invalid_argument("GaConfig: blend_extension must be nonnegative");
  }
};

struct GenerationRecord {
  double best = 0.0;
  double mean = 0.0;
  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct GaResult {
  Candidate best_candidate;
  double best_fitness = -std::numeric_limits<double>::infinity();
  /// Entry 0 is the initial population, entry g the population after generation g.
  std::vector<GenerationRecord> history;
  friend bool operator==(const GaResult&, const GaResult&) = default;
};

/// Fitness to maximize, with its declared arity.
struct Fitness {
  std::size_t arity = 0;
  std::function<double(std::span<const double>)> eval;
};

/// Index of the fitter of two uniformly drawn members (first draw wins ties).
inline std::size_t tournament_select(std::span<const double> fitnesses, Rng& rng) {
  if (fitnesses.empty()) throw std::invalid_argument("tournament_select: empty population");
  const std::size_t a = rng.index(fitnesses.size());
  const std::size_t b = rng.index(fitnesses.size());
  return fitnesses[b] > fitnesses[a] ? b : a;
}

/// Children w*a + (1-w)*b and (1-w)*a + w*b with one weight per coordinate,
/// clipped to the box.
inline std::pair<Candidate, Candidate> blend_with_weights(std::span<const double> a, std::span<const double> b,
                                                          std::span<const double> weights, const SearchBox& box) {
  if (a.size() != b.size() || a.size() != weights.size() || a.size() != box.dim()) {
    throw std::invalid_argument("blend_crossover: dimension mismatch");
  }
  Candidate c1(a.size()), c2(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = weights[i];
    c1[i] = w * a[i] + (1.0 - w) * b[i];
    c2[i] = (1.0 - w) * a[i] + w * b[i];
  }
  box.clip(c1);
  box.clip(c2);
  return {std::move(c1), std::move(c2)};
}

inline std::pair<Candidate, Candidate> blend_crossover(std::span<const double> a, std::span<const double> b,
                                                       const SearchBox& box, double extension, Rng& rng) {
  if (a.size() != b.size()) throw std::invalid_argument("blend_crossover: dimension mismatch");
  std::vector<double> w(a.size());
  for (double& wi : w) wi = rng.uniform(-extension, 1.0 + extension);
  return blend_with_weights(a, b, w, box);
}

/// Each coordinate independently resampled from U(lower, upper) with
/// probability mutation_prob.
inline Candidate uniform_mutate(std::span<const double> x, const SearchBox& box, double mutation_prob, Rng& rng) {
  Candidate out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.bernoulli(mutation_prob)) out[i] = rng.uniform(box.lower[i], box.upper[i]);
  }
  return out;
}

namespace detail {

inline double sanitize(double f) noexcept {
  return std::isnan(f) ? -std::numeric_limits<double>::infinity() : f;
}

// Evaluates members [first, population.size()) into fitnesses by index.
inline void evaluate_range(const Fitness& fitness, const std::vector<Candidate>& population,
                           std::vector<double>& fitnesses, std::size_t first, unsigned threads) {
  const std::size_t count = population.size() - first;
  if (threads <= 1 || count < 2) {
    for (std::size_t i = first; i < population.size(); ++i) fitnesses[i] = sanitize(fitness.eval(population[i]));
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = first + w; i < population.size(); i += workers) {
            fitnesses[i] = sanitize(fitness.eval(population[i]));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline GenerationRecord summarize(std::span<const double> fitnesses) {
  GenerationRecord rec;
  rec.best = *std::max_element(fitnesses.begin(), fitnesses.end());
  rec.mean = std::accumulate(fitnesses.begin(), fitnesses.end(), 0.0) / static_cast<double>(fitnesses.size());
  return rec;
}

}  // namespace detail

/// Maximizes `fitness` over `box`. The generation-g draws come from stream
/// derive_seed(cfg.seed, g), so equal inputs give bit-identical results.
inline GaResult run_ga(const Fitness& fitness, const SearchBox& box, const GaConfig& cfg) {
  box.validate();
  cfg.validate();
  if (fitness.arity != box.dim()) {
    throw std::invalid_argument("run_ga: fitness arity " + std::to_string(fitness.arity) +
                                " does not match box dimension " + std::to_string(box.dim()));
  }
  if (!fitness.eval) throw std::invalid_argument("run_ga: empty fitness function");

  const std::size_t pop_size = cfg.population_size;
  std::vector<Candidate> population(pop_size, Candidate(box.dim()));
  std::vector<double> fitnesses(pop_size);

  Rng init_rng(derive_seed(cfg.seed, 0));
  for (auto& member : population) {
    for (std::size_t i = 0; i < box.dim(); ++i) member[i] = init_rng.uniform(box.lower[i], box.upper[i]);
  }
  detail::evaluate_range(fitness, population, fitnesses, 0, cfg.threads);

  GaResult result;
  result.history.reserve(cfg.generations + 1);
  auto track_best = [&] {
    const auto it = std::max_element(fitnesses.begin(), fitnesses.end());
    if (*it > result.best_fitness || result.best_candidate.empty()) {
      result.best_fitness = *it;
      result.best_candidate = population[static_cast<std::size_t>(it - fitnesses.begin())];
    }
  };
  track_best();
  result.history.push_back(detail::summarize(fitnesses));

  std::vector<std::size_t> order(pop_size);
  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    Rng rng(derive_seed(cfg.seed, gen));

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitnesses[a] > fitnesses[b]; });

    std::vector<Candidate> next;
    std::vector<double> next_fit(pop_size);
    next.reserve(pop_size);
    for (std::size_t e = 0; e < cfg.elite_count; ++e) {
      next.push_back(population[order[e]]);
      next_fit[e] = fitnesses[order[e]];
    }
    while (next.size() < pop_size) {
      const Candidate& pa = population[tournament_select(fitnesses, rng)];
      const Candidate& pb = population[tournament_select(fitnesses, rng)];
      Candidate c1, c2;
      if (rng.bernoulli(cfg.crossover_prob)) {
        std::tie(c1, c2) = blend_crossover(pa, pb, box, cfg.blend_extension, rng);
      } else {
        c1 = pa;
        c2 = pb;
      }
      next.push_back(uniform_mutate(c1, box, cfg.mutation_prob, rng));
      if (next.size() < pop_size) next.push_back(uniform_mutate(c2, box, cfg.mutation_prob, rng));
    }
    population = std::move(next);
    fitnesses = std::move(next_fit);
    detail::evaluate_range(fitness, population, fitnesses, cfg.elite_count, cfg.threads);

    track_best();
    result.history.push_back(detail::summarize(fitnesses));
  }
  return result;
}

}  // namespace sfga
