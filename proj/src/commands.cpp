#include "pmqkd/commands.hpp"

#include <cmath>
#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <ostream>

#include "pmqkd/channel.hpp"
#include "pmqkd/errors.hpp"
#include "pmqkd/format.hpp"
#include "pmqkd/report.hpp"

namespace pmqkd {

namespace {

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw UsageError(field + ": " + what);
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + step * static_cast<double>(i));
  return out;
}

// Evaluates fn(0..count-1) on a fixed pool of workers; results keep index order.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn fn) {
  std::vector<T> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), count));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (mu) check(std::isfinite(*mu) && *mu >= 0.0, "mu", "must be >= 0");
  check(m_slices >= 2 && m_slices % 2 == 0, "m_slices", "must be an even integer >= 2");
  check(n_rounds >= 1.0, "N", "must be >= 1");
  check(p_s > 0.0 && p_s < 1.0, "p_s", "must lie in (0,1)");
  check(f >= 1.0, "f", "must be >= 1");
  check(e_d >= 0.0 && e_d <= 0.5, "e_d", "must lie in [0,0.5]");
  check(p_d >= 0.0 && p_d < 1.0, "p_d", "must lie in [0,1)");
  check(eta_d > 0.0 && eta_d <= 1.0, "eta_d", "must lie in (0,1]");
  check(alpha_db_per_km > 0.0, "alpha", "must be > 0");
  check(!(loss_db && distance_km), "loss_db", "give either loss_db or distance_km, not both");
  if (loss_db) check(*loss_db >= 0.0, "loss_db", "must be >= 0");
  if (distance_km) check(*distance_km >= 0.0, "distance_km", "must be >= 0");
  check(budget.eps > 0.0 && budget.eps < 1.0, "eps", "must lie in (0,1)");
  check(budget.eps_ka > 0.0 && budget.eps_ka < 1.0, "eps_ka", "must lie in (0,1)");
  check(budget.xi > 0.0, "xi", "must be > 0");
  check(budget.xi_prime > 0.0, "xi_prime", "must be > 0");
  check(d_step > 0.0, "step", "must be > 0");
  check(d_max >= d_min, "d_max", "must be >= d_min");
  check(loss_step > 0.0, "loss_step", "must be > 0");
  check(loss_max >= loss_min, "loss_max", "must be >= loss_min");
  for (double n : scan_n_rounds) check(n >= 1.0, "scan_N", "values must be >= 1");
}

ChannelSpec RunConfig::channel() const {
  if (distance_km) return ChannelSpec::from_distance(*distance_km, alpha_db_per_km, eta_d, p_d, e_d);
  if (!loss_db) throw UsageError("loss_db: required (or distance_km)");
  return ChannelSpec::from_loss(*loss_db, eta_d, p_d, e_d);
}

ProtocolParams RunConfig::protocol(double intensity) const {
  ProtocolParams p;
  p.mu = intensity;
  p.m_slices = m_slices;
  p.n_rounds = n_rounds;
  p.p_s = p_s;
  p.channel = channel();
  p.f = f;
  p.budget = budget;
  return p;
}

SecurityOptions RunConfig::security() const {
  SecurityOptions s;
  s.log_base = log_base;
  return s;
}

namespace {

void require_bound_slices(const RunConfig& config) {
  check(config.m_slices == 6 || config.m_slices == 8, "m_slices",
        "key-rate bounds support 6 or 8 slices");
}

}  // namespace

KeyRateResult cmd_keyrate(const RunConfig& config) {
  config.validate();
  require_bound_slices(config);
  if (!config.mu) throw UsageError("mu: required for keyrate (use optimize to search)");
  const ProtocolParams params = config.protocol(*config.mu);
  if (gain(params.mu, transmittance(params.channel), params.channel.p_d()) == 0.0) {
    // No light and no dark counts: nothing is ever detected.
    KeyRateResult r;
    r.inputs = {params.mu, params.m_slices, params.n_rounds, params.p_s};
    r.inputs.f = params.f;
    r.budget = params.budget;
    r.epsilons = compose_epsilons(params.budget);
    r.key.ell_raw = -(params.budget.xi + params.budget.xi_prime);
    return r;
  }
  return analytic_key_rate(params, config.security());
}

OptimizationResult cmd_optimize(const RunConfig& config) {
  config.validate();
  require_bound_slices(config);
  OptimizerConfig opt = config.optimizer;
  opt.security = config.security();
  return optimize(config.channel(), config.n_rounds, config.m_slices, config.budget, opt,
                  config.f);
}

std::vector<ScanRow> cmd_scan(const RunConfig& config) {
  config.validate();
  require_bound_slices(config);
  const std::vector<double> ns =
      config.scan_n_rounds.empty() ? std::vector<double>{config.n_rounds} : config.scan_n_rounds;
  const std::vector<double> distances = grid(config.d_min, config.d_max, config.d_step);

  return parallel_map<ScanRow>(ns.size() * distances.size(), [&](std::size_t i) {
    RunConfig c = config;
    c.n_rounds = ns[i / distances.size()];
    c.loss_db.reset();
    c.distance_km = distances[i % distances.size()];
    ScanRow row;
    row.distance_km = *c.distance_km;
    row.loss_db = c.channel().total_loss_db();
    row.n_rounds = c.n_rounds;
    if (c.mu) {
      row.mu = *c.mu;
      row.p_s = c.p_s;
      row.rate = cmd_keyrate(c).rate();
    } else {
      const OptimizationResult r = cmd_optimize(c);
      row.mu = r.mu_opt;
      row.p_s = r.p_s_opt;
      row.rate = r.rate_opt;
    }
    return row;
  });
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "distance_km,loss_db,N,mu,p_s,R\n";
  for (const auto& r : rows) {
    out << format_number(r.distance_km) << ',' << format_number(r.loss_db) << ','
        << format_number(r.n_rounds) << ',' << format_number(r.mu) << ','
        << format_number(r.p_s) << ',' << format_number(r.rate) << '\n';
  }
}

std::vector<DeviationRow> cmd_deviation(const RunConfig& config) {
  config.validate();
  require_bound_slices(config);
  const std::vector<double> losses = grid(config.loss_min, config.loss_max, config.loss_step);
  return parallel_map<DeviationRow>(losses.size(), [&](std::size_t i) {
    RunConfig c = config;
    c.distance_km.reset();
    c.loss_db = losses[i];
    DeviationRow row;
    row.loss_db = losses[i];
    KeyRateResult r;
    if (c.mu) {
      r = cmd_keyrate(c);
      row.mu = *c.mu;
    } else {
      const OptimizationResult o = cmd_optimize(c);
      r = o.detail;
      row.mu = o.mu_opt;
    }
    row.deltas = r.phase.deviations;
    row.ep_m = r.phase.ep_m;
    row.ratio = row.ep_m > 0.0 ? r.phase.deviation_sum() / row.ep_m : 0.0;
    return row;
  });
}

void write_deviation_csv(std::ostream& out, const std::vector<DeviationRow>& rows,
                         int m_slices) {
  out << "loss_db,mu";
  for (int k = 0; k <= m_slices - 2; k += 2) out << ",delta_" << k;
  out << ",E_p_M,sum_delta_over_E_p_M\n";
  for (const auto& r : rows) {
    out << format_number(r.loss_db) << ',' << format_number(r.mu);
    for (double d : r.deltas) out << ',' << format_number(d);
    out << ',' << format_number(r.ep_m) << ',' << format_number(r.ratio) << '\n';
  }
}

ExperimentRecord cmd_simulate(const RunConfig& config) {
  config.validate();
  if (!config.mu) throw UsageError("mu: required for simulate");
  const ProtocolParams params = config.protocol(*config.mu);
  SimulationOptions opts;
  opts.threads = config.threads;
  return make_record(params, simulate(params, config.seed, opts));
}

Reproduction cmd_reproduce(const RunConfig& config, const std::string& csv_path) {
  config.validate();
  Reproduction out;
  out.record = parse_tally_csv(csv_path);
  if (!config.components_path.empty()) {
    out.record.component_losses = parse_component_losses(config.components_path);
  }
  ReproduceOptions opts;
  opts.gain = config.gain;
  opts.counts = config.counts;
  opts.f = config.f;
  opts.eta_d = config.eta_d;
  opts.p_d = config.p_d;
  opts.security = config.security();
  out.observables = derive_observables(out.record, config.counts.value_or(out.record.counts));
  out.result = reproduce_key_rate(out.record, config.budget, opts);
  return out;
}

void write_keyrate(std::ostream& out, const KeyRateResult& r, OutputFormat format) {
  if (format == OutputFormat::kJson) {
    out << to_json(r).dump(2) << '\n';
    return;
  }
  out << "mu,m_slices,N,p_s,Q_mu,E_b,n_mu,m_s,Y0_bar,vacuum_term,multiphoton_term,"
         "deviation_sum,E_p_M,Delta_Ka,E_p_M_bar,ell,R\n";
  const auto& in = r.inputs;
  out << format_number(in.mu) << ',' << in.m_slices << ',' << format_number(in.n_rounds) << ','
      << format_number(in.p_s) << ',' << format_number(in.q_mu) << ','
      << format_number(in.e_b) << ',' << format_number(in.n_mu) << ','
      << format_number(in.m_s) << ',' << format_number(r.vacuum.y0_bar) << ','
      << format_number(r.phase.vacuum_term) << ',' << format_number(r.phase.multiphoton_term)
      << ',' << format_number(r.phase.deviation_sum()) << ',' << format_number(r.phase.ep_m)
      << ',' << format_number(r.kato.delta) << ',' << format_number(r.phase.ep_m_bar) << ','
      << format_number(r.key.ell) << ',' << format_number(r.key.rate) << '\n';
}

}  // namespace pmqkd
