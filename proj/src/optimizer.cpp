#include "pmqkd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pmqkd/errors.hpp"

namespace pmqkd {

namespace {

// Search space: x[0] = log10(mu), x[1] = log10(p_s), each box-constrained.
struct Point {
  double x0 = 0.0;
  double x1 = 0.0;
};

class Objective {
 public:
  Objective(const ChannelSpec& channel, double n_rounds, int m_slices,
            const SecurityBudget& budget, const OptimizerConfig& config, double f)
      : config_(config) {
    base_.channel = channel;
    base_.n_rounds = n_rounds;
    base_.m_slices = m_slices;
    base_.budget = budget;
    base_.f = f;
    lo_ = {std::log10(config.bounds.mu_min), std::log10(config.bounds.p_s_min)};
    hi_ = {std::log10(config.bounds.mu_max), std::log10(config.bounds.p_s_max)};
    if (!config.optimize_p_s) lo_.x1 = hi_.x1 = std::log10(config.fixed_p_s);
  }

  Point clamp(Point p) const {
    return {std::clamp(p.x0, lo_.x0, hi_.x0), std::clamp(p.x1, lo_.x1, hi_.x1)};
  }

  Candidate candidate(const Point& p) const {
    const double p_s = config_.optimize_p_s ? std::pow(10.0, p.x1) : config_.fixed_p_s;
    return {std::pow(10.0, p.x0), p_s};
  }

  KeyRateResult detail(const Candidate& c) const {
    ProtocolParams params = base_;
    params.mu = c.mu;
    params.p_s = c.p_s;
    return analytic_key_rate(params, config_.security);
  }

  // Unfloored rate ell_raw / N; negative values still rank candidates.
  double operator()(const Point& p, OptimizationResult& out) const {
    const Point q = clamp(p);
    const Candidate c = candidate(q);
    const KeyRateResult r = detail(c);
    ++out.evaluations;
    out.trace.push_back({c, r.key.rate});
    return r.key.ell_raw / base_.n_rounds;
  }

  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }

 private:
  ProtocolParams base_;
  const OptimizerConfig& config_;
  Point lo_;
  Point hi_;
};

struct Best {
  Point point;
  double value = -std::numeric_limits<double>::infinity();

  void offer(const Point& p, double v) {
    if (v > value) {
      value = v;
      point = p;
    }
  }
};

void grid_scan(const Objective& obj, const OptimizerConfig& cfg, OptimizationResult& out,
               Best& best) {
  const int nx = std::max(cfg.grid_mu, 1);
  const int ny = std::max(cfg.grid_p_s, 1);
  for (int i = 0; i < nx; ++i) {
    const double x0 =
        nx == 1 ? obj.lo().x0 : obj.lo().x0 + (obj.hi().x0 - obj.lo().x0) * i / (nx - 1);
    for (int j = 0; j < ny; ++j) {
      const double x1 =
          ny == 1 ? obj.lo().x1 : obj.lo().x1 + (obj.hi().x1 - obj.lo().x1) * j / (ny - 1);
      const Point p{x0, x1};
      best.offer(p, obj(p, out));
    }
  }
}

// Real-coded GA: tournament selection, blend crossover, Gaussian mutation,
// single elite.
void genetic_search(const Objective& obj, const OptimizerConfig& cfg, OptimizationResult& out,
                    Best& best) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double span0 = obj.hi().x0 - obj.lo().x0;
  const double span1 = obj.hi().x1 - obj.lo().x1;
  const int n = std::max(cfg.population, 4);

  std::vector<Point> pop;
  std::vector<double> fit;
  pop.push_back(best.point);
  fit.push_back(best.value);
  while (static_cast<int>(pop.size()) < n) {
    const Point p{obj.lo().x0 + span0 * unit(rng), obj.lo().x1 + span1 * unit(rng)};
    pop.push_back(p);
    fit.push_back(obj(p, out));
    best.offer(p, fit.back());
  }

  auto tournament = [&]() -> const Point& {
    const int i = static_cast<int>(unit(rng) * n) % n;
    const int j = static_cast<int>(unit(rng) * n) % n;
    return fit[i] >= fit[j] ? pop[i] : pop[j];
  };

  for (int g = 0; g < cfg.generations; ++g) {
    const double sigma = 0.1 * std::pow(0.92, g);
    std::vector<Point> next{best.point};
    std::vector<double> next_fit{best.value};
    while (static_cast<int>(next.size()) < n) {
      const Point& a = tournament();
      const Point& b = tournament();
      const double w0 = -0.25 + 1.5 * unit(rng);
      const double w1 = -0.25 + 1.5 * unit(rng);
      Point child{a.x0 + w0 * (b.x0 - a.x0) + sigma * span0 * gauss(rng),
                  a.x1 + w1 * (b.x1 - a.x1) + sigma * span1 * gauss(rng)};
      child = obj.clamp(child);
      next.push_back(child);
      next_fit.push_back(obj(child, out));
      best.offer(child, next_fit.back());
    }
    pop = std::move(next);
    fit = std::move(next_fit);
  }
}

// Compass search from the incumbent, halving the step on failure.
void pattern_search(const Objective& obj, OptimizationResult& out, Best& best,
                    double initial_step, double min_step) {
  double step = initial_step;
  while (step > min_step) {
    bool improved = false;
    for (const Point d : {Point{1, 0}, Point{-1, 0}, Point{0, 1}, Point{0, -1}}) {
      const Point p = obj.clamp({best.point.x0 + step * d.x0, best.point.x1 + step * d.x1});
      const double v = obj(p, out);
      if (v > best.value) {
        best.offer(p, v);
        improved = true;
        break;
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace

OptimizationResult optimize(const ChannelSpec& channel, double n_rounds, int m_slices,
                            const SecurityBudget& budget, const OptimizerConfig& config,
                            double f) {
  const auto& b = config.bounds;
  if (!(b.mu_min > 0.0 && b.mu_min <= b.mu_max && b.p_s_min > 0.0 && b.p_s_min <= b.p_s_max &&
        b.p_s_max < 1.0)) {
    throw DomainError("optimize: invalid bounds");
  }
  if (!config.optimize_p_s && !(config.fixed_p_s > 0.0 && config.fixed_p_s < 1.0)) {
    throw DomainError("optimize: fixed p_s must lie in (0,1)");
  }

  OptimizationResult out;
  const Objective obj(channel, n_rounds, m_slices, budget, config, f);
  Best best;
  grid_scan(obj, config, out, best);
  if (config.method == SearchMethod::kGenetic) {
    genetic_search(obj, config, out, best);
    pattern_search(obj, out, best, 0.05, 1e-4);
  } else {
    pattern_search(obj, out, best, 0.25, 1e-5);
  }

  const Candidate c = obj.candidate(obj.clamp(best.point));
  out.detail = obj.detail(c);
  out.mu_opt = c.mu;
  out.p_s_opt = c.p_s;
  out.rate_opt = out.detail.key.rate;
  out.infeasible = !(out.rate_opt > 0.0);
  return out;
}

}  // namespace pmqkd
