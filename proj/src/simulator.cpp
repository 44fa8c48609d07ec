#include "pmqkd/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "pmqkd/channel.hpp"
#include "pmqkd/errors.hpp"

namespace pmqkd {

ObservedTally ObservedTally::empty(int m_slices) {
  if (m_slices < 2 || m_slices % 2 != 0) {
    throw DomainError("ObservedTally: m_slices must be an even integer >= 2");
  }
  ObservedTally t;
  t.m_slices = m_slices;
  t.rows.reserve(2 * m_slices);
  for (int a = 0; a < m_slices; ++a) t.rows.push_back({a, a, 0, 0});
  for (int a = 0; a < m_slices; ++a) t.rows.push_back({a, (a + m_slices / 2) % m_slices, 0, 0});
  return t;
}

int ObservedTally::row_index(int m_slices, int phase_a, int phase_b) {
  if (phase_a < 0 || phase_a >= m_slices || phase_b < 0 || phase_b >= m_slices) return -1;
  const int d = (phase_a - phase_b + m_slices) % m_slices;
  if (d == 0) return phase_a;
  if (d == m_slices / 2) return m_slices + phase_a;
  return -1;
}

std::uint64_t ObservedTally::matched_total() const {
  std::uint64_t s = 0;
  for (const auto& r : rows) s += r.total();
  return s;
}

std::uint64_t ObservedTally::error_total() const {
  std::uint64_t s = 0;
  for (const auto& r : rows) s += r.errors(m_slices);
  return s;
}

void ObservedTally::merge(const ObservedTally& other) {
  if (other.m_slices != m_slices || other.rows.size() != rows.size()) {
    throw DomainError("ObservedTally::merge: incompatible layouts");
  }
  n_rounds += other.n_rounds;
  n_det += other.n_det;
  n_double += other.n_double;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].d1 += other.rows[i].d1;
    rows[i].d2 += other.rows[i].d2;
  }
  m_s += other.m_s;
  n_sampled += other.n_sampled;
  n_sifted += other.n_sifted;
}

namespace {

// Cumulative click thresholds for one total phase difference.
struct ClickTable {
  double d1_only = 0.0;
  double single = 0.0;  // d1_only + d2_only
  double any = 0.0;     // single + double
};

inline double unit_uniform(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, m) from 32 random bits.
inline int small_uniform(std::uint64_t bits32, int m) {
  return static_cast<int>((bits32 * static_cast<std::uint64_t>(m)) >> 32);
}

struct BlockRunner {
  int m;
  int half;
  double e_d;
  double p_s;
  std::vector<ClickTable> table;
  std::uint64_t seed;
  std::uint64_t block_rounds;
  std::uint64_t total_rounds;

  void run_block(std::uint64_t block, ObservedTally& out) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block),
                      static_cast<std::uint32_t>(block >> 32)};
    std::mt19937_64 rng(seq);
    const std::uint64_t begin = block * block_rounds;
    const std::uint64_t end = std::min(total_rounds, begin + block_rounds);
    out.n_rounds += end - begin;
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::uint64_t x = rng();
      const std::uint64_t y = rng();
      const int theta_a = small_uniform(x >> 32, m);
      const int theta_b = small_uniform(x & 0xffffffffu, m);
      const int bit_a = static_cast<int>(y & 1u);
      const int bit_b = static_cast<int>((y >> 1) & 1u);
      const int phase_a = (theta_a + bit_a * half) % m;
      const int phase_b = (theta_b + bit_b * half) % m;
      const int diff = (phase_a - phase_b + m) % m;
      const ClickTable& c = table[diff];
      const double u = unit_uniform(y);
      if (u >= c.any) continue;
      if (u >= c.single) {
        ++out.n_double;
        continue;
      }
      ++out.n_det;
      if (diff != 0 && diff != half) continue;

      int detector = (u < c.d1_only) ? 1 : 2;
      if (unit_uniform(rng()) < e_d) detector = 3 - detector;
      TallyRow& row = out.rows[diff == 0 ? phase_a : m + phase_a];
      (detector == 1 ? row.d1 : row.d2) += 1;
      const bool error = (diff == 0) == (detector == 2);
      if (unit_uniform(rng()) < p_s) {
        ++out.n_sampled;
        out.m_s += error ? 1 : 0;
      } else {
        ++out.n_sifted;
      }
    }
  }
};

}  // namespace

ObservedTally simulate(const ProtocolParams& params, std::uint64_t seed,
                       const SimulationOptions& options) {
  params.validate();
  if (params.n_rounds > 9.0e18) throw DomainError("simulate: n_rounds too large");
  if (options.block_rounds == 0) throw DomainError("simulate: block_rounds must be > 0");

  BlockRunner runner;
  runner.m = params.m_slices;
  runner.half = params.m_slices / 2;
  runner.e_d = params.channel.e_d();
  runner.p_s = params.p_s;
  runner.seed = seed;
  runner.block_rounds = options.block_rounds;
  runner.total_rounds = static_cast<std::uint64_t>(params.n_rounds);

  const double eta = transmittance(params.channel);
  const double p_d = params.channel.p_d();
  const double signal = params.mu * eta;
  for (int d = 0; d < runner.m; ++d) {
    const double c = std::cos(2.0 * std::numbers::pi * d / runner.m);
    const double s1 = signal * (1.0 + c) / 2.0;
    const double s2 = signal * (1.0 - c) / 2.0;
    // click = 1 - (1-p_d) e^{-s}, written to keep precision for tiny s
    const double p1 = -std::expm1(-s1) + p_d * std::exp(-s1);
    const double p2 = -std::expm1(-s2) + p_d * std::exp(-s2);
    ClickTable t;
    t.d1_only = p1 * (1.0 - p2);
    t.single = t.d1_only + p2 * (1.0 - p1);
    t.any = t.single + p1 * p2;
    runner.table.push_back(t);
  }

  const std::uint64_t blocks =
      (runner.total_rounds + options.block_rounds - 1) / options.block_rounds;
  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(blocks, 1)));

  std::vector<ObservedTally> partial(threads, ObservedTally::empty(params.m_slices));
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::uint64_t b = t; b < blocks; b += threads) runner.run_block(b, partial[t]);
    });
  }
  workers.clear();

  ObservedTally total = ObservedTally::empty(params.m_slices);
  for (const auto& p : partial) total.merge(p);
  return total;
}

TallyStats tally_to_stats(const ObservedTally& tally) {
  const std::uint64_t matched = tally.matched_total();
  if (tally.n_rounds == 0 || matched == 0) {
    throw NoDataError("tally_to_stats: tally has no matched clicks");
  }
  TallyStats s;
  s.q_emp = static_cast<double>(tally.n_det) / static_cast<double>(tally.n_rounds);
  s.e_b_emp = static_cast<double>(tally.error_total()) / static_cast<double>(matched);
  s.n_mu_emp = static_cast<double>(tally.n_sifted);
  return s;
}

}  // namespace pmqkd
