#include "pmqkd/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "pmqkd/channel.hpp"
#include "pmqkd/errors.hpp"
#include "pmqkd/format.hpp"

namespace pmqkd {

namespace {

constexpr const char* kHeader = "phase_a,phase_b,d1_count,d2_count";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& text, const std::string& what, int line) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw SchemaError("invalid number for " + what + ": '" + text + "'", line);
  }
  return v;
}

std::uint64_t parse_count(const std::string& text, const std::string& what, int line) {
  if (!text.empty() && text.front() == '-') {
    throw SchemaError("negative count in " + what + ": '" + text + "'", line);
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw SchemaError("invalid count in " + what + ": '" + text + "'", line);
  }
  return v;
}

std::uint64_t real_to_count(double v, const std::string& what, int line) {
  if (v < 0.0 || v != std::floor(v) || v > 1.8e19) {
    throw SchemaError(what + " must be a nonnegative integer", line);
  }
  return static_cast<std::uint64_t>(v);
}

// Phase as a reduced fraction num/den of pi.
struct PiFraction {
  long num = 0;
  long den = 1;
};

PiFraction parse_phase(const std::string& text, int line) {
  static const std::regex re(R"(^(?:0|([0-9]*)\s*pi(?:\s*/\s*([0-9]+))?)$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    throw SchemaError("unrecognized phase '" + text + "' (expected e.g. 0, pi/4, 3pi/2)", line);
  }
  if (text == "0") return {0, 1};
  long num = m[1].length() > 0 ? std::stol(m[1].str()) : 1;
  long den = m[2].length() > 0 ? std::stol(m[2].str()) : 1;
  if (den == 0) throw SchemaError("zero denominator in phase '" + text + "'", line);
  const long g = std::gcd(num, den);
  if (g != 0) {
    num /= g;
    den /= g;
  }
  return {num % (2 * den), den};
}

// Smallest slice count M on whose grid the phase lies.
long grid_order(const PiFraction& p) {
  return (2 * p.den) / std::gcd(p.num, 2 * p.den);
}

struct RawRow {
  PiFraction a;
  PiFraction b;
  std::uint64_t d1;
  std::uint64_t d2;
  int line;
};

CountsConvention parse_convention(const std::string& v, int line) {
  if (v == "sifted_key") return CountsConvention::kSiftedKey;
  if (v == "all_matched") return CountsConvention::kAllMatched;
  throw SchemaError("counts must be sifted_key or all_matched, got '" + v + "'", line);
}

}  // namespace

void ExperimentRecord::validate() const {
  if (!(loss_db > 0.0)) throw SchemaError("loss_db must be > 0");
  if (!(mu > 0.0)) throw SchemaError("mu must be > 0");
  if (!(p_s > 0.0 && p_s < 1.0)) throw SchemaError("p_s must lie in (0,1)");
  if (!(n_rounds >= 1.0)) throw SchemaError("N must be >= 1");
}

std::string format_phase(int index, int m_slices) {
  long num = 2L * index;
  long den = m_slices;
  const long g = std::gcd(num, den);
  if (g != 0) {
    num /= g;
    den /= g;
  }
  if (num == 0) return "0";
  std::string s = (num == 1 ? "" : std::to_string(num)) + "pi";
  if (den != 1) s += "/" + std::to_string(den);
  return s;
}

ExperimentRecord parse_tally_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open tally file " + path.string());
  return parse_tally_csv(in);
}

ExperimentRecord parse_tally_csv(std::istream& in) {
  std::map<std::string, std::pair<std::string, int>> meta;
  std::vector<RawRow> raw;
  bool header_seen = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = trim(std::string_view(t).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;  // free-form comment
      const std::string key = trim(std::string_view(body).substr(0, eq));
      if (meta.count(key) != 0) throw SchemaError("duplicate metadata key '" + key + "'", line_no);
      meta[key] = {trim(std::string_view(body).substr(eq + 1)), line_no};
      continue;
    }
    if (!header_seen) {
      std::string normalized;
      for (const auto& f : split_csv(t)) normalized += (normalized.empty() ? "" : ",") + f;
      if (normalized != kHeader) {
        throw SchemaError(std::string("expected header '") + kHeader + "'", line_no);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(t);
    if (fields.size() != 4) throw SchemaError("expected 4 fields", line_no);
    raw.push_back({parse_phase(fields[0], line_no), parse_phase(fields[1], line_no),
                   parse_count(fields[2], "d1_count", line_no),
                   parse_count(fields[3], "d2_count", line_no), line_no});
  }
  if (!header_seen) throw SchemaError("missing header line");
  if (raw.empty()) throw SchemaError("empty data section");

  auto required = [&](const std::string& key) -> std::pair<std::string, int> {
    auto it = meta.find(key);
    if (it == meta.end()) throw SchemaError("missing metadata '" + key + "'");
    return it->second;
  };
  auto real_of = [&](const std::string& key) {
    const auto [v, l] = required(key);
    return parse_real(v, key, l);
  };
  auto optional_real = [&](const std::string& key) -> std::optional<double> {
    if (meta.count(key) == 0) return std::nullopt;
    return real_of(key);
  };

  ExperimentRecord rec;
  rec.loss_db = real_of("loss_db");
  rec.n_rounds = real_of("N");
  rec.mu = real_of("mu");
  rec.p_s = real_of("p_s");
  const double n_det = real_of("n_det");

  int m_slices = 0;
  if (auto m = optional_real("m_slices")) {
    m_slices = static_cast<int>(*m);
    if (*m != m_slices || m_slices < 2 || m_slices % 2 != 0) {
      throw SchemaError("m_slices must be an even integer >= 2", meta["m_slices"].second);
    }
  } else {
    long order = 2;
    for (const auto& r : raw) order = std::lcm(order, std::lcm(grid_order(r.a), grid_order(r.b)));
    m_slices = static_cast<int>(order);
  }

  rec.tally = ObservedTally::empty(m_slices);
  rec.tally.n_rounds = real_to_count(rec.n_rounds, "N", required("N").second);
  rec.tally.n_det = real_to_count(n_det, "n_det", required("n_det").second);
  std::set<int> seen;
  for (const auto& r : raw) {
    auto to_index = [&](const PiFraction& p) {
      const long scaled = p.num * m_slices;
      if (scaled % (2 * p.den) != 0) {
        throw SchemaError("phase not on the " + std::to_string(m_slices) + "-slice grid", r.line);
      }
      return static_cast<int>(scaled / (2 * p.den));
    };
    const int a = to_index(r.a);
    const int b = to_index(r.b);
    const int idx = ObservedTally::row_index(m_slices, a, b);
    if (idx < 0) throw SchemaError("phase pair is not matched (difference not 0 or pi)", r.line);
    if (!seen.insert(idx).second) throw SchemaError("duplicate phase pair", r.line);
    rec.tally.rows[idx].d1 = r.d1;
    rec.tally.rows[idx].d2 = r.d2;
  }

  if (meta.count("counts") != 0) {
    rec.counts = parse_convention(meta["counts"].first, meta["counts"].second);
  }
  const bool has_ms = meta.count("m_s") != 0;
  const bool has_sampled = meta.count("n_sampled") != 0;
  const bool has_sifted = meta.count("n_sifted") != 0;
  if (has_ms || has_sampled || has_sifted) {
    if (!(has_ms && has_sampled && has_sifted)) {
      throw SchemaError("m_s, n_sampled and n_sifted must be given together");
    }
    rec.tally.m_s = real_to_count(real_of("m_s"), "m_s", meta["m_s"].second);
    rec.tally.n_sampled = real_to_count(real_of("n_sampled"), "n_sampled", meta["n_sampled"].second);
    rec.tally.n_sifted = real_to_count(real_of("n_sifted"), "n_sifted", meta["n_sifted"].second);
    if (rec.tally.n_sampled + rec.tally.n_sifted != rec.tally.matched_total()) {
      throw SchemaError("n_sampled + n_sifted must equal the sum of matched counts");
    }
    rec.exact_sampling = true;
  }
  if (auto v = optional_real("n_double")) {
    rec.tally.n_double = real_to_count(*v, "n_double", meta["n_double"].second);
  }
  rec.eta_d = optional_real("eta_d");
  rec.p_d = optional_real("p_d");
  rec.e_d = optional_real("e_d");
  rec.validate();
  return rec;
}

void write_tally_csv(std::ostream& out, const ExperimentRecord& record) {
  const ObservedTally& t = record.tally;
  out << "# loss_db=" << format_number(record.loss_db) << '\n'
      << "# N=" << format_number(record.n_rounds) << '\n'
      << "# mu=" << format_number(record.mu) << '\n'
      << "# p_s=" << format_number(record.p_s) << '\n'
      << "# n_det=" << t.n_det << '\n'
      << "# m_slices=" << t.m_slices << '\n'
      << "# counts="
      << (record.counts == CountsConvention::kAllMatched ? "all_matched" : "sifted_key") << '\n';
  if (record.exact_sampling) {
    out << "# m_s=" << t.m_s << '\n'
        << "# n_sampled=" << t.n_sampled << '\n'
        << "# n_sifted=" << t.n_sifted << '\n'
        << "# n_double=" << t.n_double << '\n';
  }
  if (record.eta_d) out << "# eta_d=" << format_number(*record.eta_d) << '\n';
  if (record.p_d) out << "# p_d=" << format_number(*record.p_d) << '\n';
  if (record.e_d) out << "# e_d=" << format_number(*record.e_d) << '\n';
  out << kHeader << '\n';
  for (const auto& r : t.rows) {
    out << format_phase(r.phase_a, t.m_slices) << ',' << format_phase(r.phase_b, t.m_slices) << ','
        << r.d1 << ',' << r.d2 << '\n';
  }
}

std::vector<std::pair<std::string, double>> parse_component_losses(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open component-loss file " + path.string());
  return parse_component_losses(in);
}

std::vector<std::pair<std::string, double>> parse_component_losses(std::istream& in) {
  std::vector<std::pair<std::string, double>> out;
  bool header_seen = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_csv(t);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "device" || fields[1] != "attenuation_db") {
        throw SchemaError("expected header 'device,attenuation_db'", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2 || fields[0].empty()) throw SchemaError("expected 2 fields", line_no);
    const double db = parse_real(fields[1], "attenuation_db", line_no);
    if (db < 0.0) throw SchemaError("negative attenuation", line_no);
    out.emplace_back(fields[0], db);
  }
  if (out.empty()) throw SchemaError("empty component-loss table");
  return out;
}

ExperimentRecord make_record(const ProtocolParams& params, const ObservedTally& tally) {
  ExperimentRecord rec;
  rec.loss_db = params.channel.total_loss_db();
  rec.n_rounds = static_cast<double>(tally.n_rounds);
  rec.mu = params.mu;
  rec.p_s = params.p_s;
  rec.tally = tally;
  rec.counts = CountsConvention::kAllMatched;
  rec.exact_sampling = true;
  rec.eta_d = params.channel.eta_d();
  rec.p_d = params.channel.p_d();
  rec.e_d = params.channel.e_d();
  return rec;
}

Observables derive_observables(const ExperimentRecord& record) {
  return derive_observables(record, record.counts);
}

Observables derive_observables(const ExperimentRecord& record, CountsConvention counts) {
  Observables o;
  o.matched = record.tally.matched_total();
  o.errors = record.tally.error_total();
  if (o.matched == 0) throw NoDataError("derive_observables: no matched clicks");
  const double matched = static_cast<double>(o.matched);
  o.e_b = static_cast<double>(o.errors) / matched;
  if (record.exact_sampling) {
    o.n_mu = static_cast<double>(record.tally.n_sifted);
    o.n_s = static_cast<double>(record.tally.n_sampled);
    o.m_s = static_cast<double>(record.tally.m_s);
    return o;
  }
  if (counts == CountsConvention::kSiftedKey) {
    o.n_mu = matched;
    o.n_s = matched * record.p_s / (1.0 - record.p_s);
  } else {
    o.n_mu = matched * (1.0 - record.p_s);
    o.n_s = matched * record.p_s;
  }
  o.m_s = std::round(o.e_b * o.n_s);
  o.m_s_reconstructed = true;
  return o;
}

KeyRateResult reproduce_key_rate(const ExperimentRecord& record, const SecurityBudget& budget,
                                 const ReproduceOptions& options) {
  record.validate();
  const Observables obs = derive_observables(record, options.counts.value_or(record.counts));
  const int m = record.tally.m_slices;

  KeyRateInputs in;
  in.mu = record.mu;
  in.m_slices = m;
  in.n_rounds = record.n_rounds;
  in.p_s = record.p_s;
  in.e_b = obs.e_b;
  in.n_mu = obs.n_mu;
  in.m_s = obs.m_s;
  in.f = options.f;
  in.m_s_reconstructed = obs.m_s_reconstructed;
  if (options.gain == GainSource::kClosedForm) {
    const double p_d = record.p_d.value_or(options.p_d);
    const auto channel =
        ChannelSpec::from_loss(record.loss_db, record.eta_d.value_or(options.eta_d), p_d);
    in.q_mu = gain(record.mu, transmittance(channel), p_d);
  } else {
    in.q_mu = obs.n_mu * m / (2.0 * record.n_rounds * (1.0 - record.p_s));
  }
  return evaluate_key_rate(in, budget, options.security);
}

}  // namespace pmqkd
