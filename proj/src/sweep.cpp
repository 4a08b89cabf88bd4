#include "byzsync/sweep.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <string>

#include "byzsync/error.hpp"
#include "byzsync/rng.hpp"

namespace byzsync {

GridSpec GridSpec::parse(std::string_view text) {
  const auto bad = [&] { throw Error(ErrorCode::InvalidArgument, "grid must look like lo:hi:steps, got " + std::string(text)); };
  const auto c1 = text.find(':');
  if (c1 == std::string_view::npos) bad();
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) bad();
  GridSpec g;
  const std::string lo(text.substr(0, c1)), hi(text.substr(c1 + 1, c2 - c1 - 1)), st(text.substr(c2 + 1));
  try {
    std::size_t used = 0;
    g.lo = std::stod(lo, &used);
    if (used != lo.size()) bad();
    g.hi = std::stod(hi, &used);
    if (used != hi.size()) bad();
  } catch (const std::logic_error&) {
    bad();
  }
  const auto r = std::from_chars(st.data(), st.data() + st.size(), g.steps);
  if (r.ec != std::errc() || r.ptr != st.data() + st.size() || g.steps < 1) bad();
  return g;
}

std::vector<double> GridSpec::values() const {
  if (steps == 1) return {lo};
  std::vector<double> v(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
  v.back() = hi;
  return v;
}

namespace {

const ByzantineProfile* profile_of(const ScenarioConfig& cfg, std::size_t k) {
  for (const auto& p : cfg.attack)
    if (p.agent == k) return &p;
  return nullptr;
}

struct LinkView {
  std::size_t k;
  double h;
  double sigma2;
  double eta;
  double gap;  // h y_k - y_j
  const ByzantineProfile* profile;
};

std::vector<LinkView> links_of(const ScenarioConfig& cfg) {
  const auto& a = cfg.analysis;
  const std::size_t j = a.agent;
  const double L = static_cast<double>(cfg.detection.cfg.L);
  std::vector<LinkView> out;
  for (std::size_t k : cfg.graph.in_neighbors(j)) {
    const ChannelModel ch = cfg.channels.link(k, j);
    const double gap = ch.h * a.window_outputs[k] - a.window_outputs[j];
    out.push_back({k, ch.h, ch.sigma2, L * gap * gap / ch.sigma2, gap, profile_of(cfg, k)});
  }
  return out;
}

double signed_delta(const ScenarioConfig& cfg, double delta, double gap) {
  if (cfg.analysis.sign_policy == SignPolicy::Subtract) return delta;
  return gap < 0.0 ? -delta : delta;
}

}  // namespace

std::vector<DeflectionLink> analysis_links(const ScenarioConfig& cfg, double p, double delta) {
  std::vector<DeflectionLink> out;
  for (const auto& v : links_of(cfg)) {
    DeflectionLink l;
    l.L = cfg.detection.cfg.L;
    l.sigma2 = v.sigma2;
    l.h = v.h;
    l.eta = v.eta;
    l.mean_gap = v.gap;
    l.byzantine = v.profile != nullptr;
    if (l.byzantine) {
      l.delta = signed_delta(cfg, delta, v.gap);
      l.p = p < 0.0 ? v.profile->p : p;
    }
    out.push_back(l);
  }
  return out;
}

std::vector<NeighborModel> analysis_neighbors(const ScenarioConfig& cfg, double delta) {
  const std::size_t L = cfg.detection.cfg.L;
  std::vector<NeighborModel> out;
  for (const auto& v : links_of(cfg)) {
    NeighborModel m;
    if (v.profile) {
      const double sd = signed_delta(cfg, delta, v.gap);
      m.moments = link_moments(L, v.sigma2, v.h, delta, v.eta, eta_prime(v.eta, L, v.sigma2, v.h, sd, v.gap));
      m.byzantine = true;
      m.p = v.profile->p;
    } else {
      m.moments = link_moments(L, v.sigma2, v.h, 0.0, v.eta, v.eta);
    }
    out.push_back(m);
  }
  return out;
}

double analysis_threshold(const ScenarioConfig& cfg) {
  std::vector<double> s2;
  for (const auto& v : links_of(cfg)) s2.push_back(v.sigma2);
  return decision_threshold(s2, cfg.detection.cfg.L, cfg.detection.cfg.lambda_margin);
}

std::vector<DeflectionRow> deflection_surface(const ScenarioConfig& cfg, const GridSpec& p_grid,
                                              const GridSpec& delta_grid, Execution exec) {
  const auto ps = p_grid.values();
  const auto ds = delta_grid.values();
  return fan_out<DeflectionRow>(
      ps.size() * ds.size(),
      [&](std::size_t i) {
        const double d = ds[i / ps.size()];
        const double p = ps[i % ps.size()];
        return DeflectionRow{d, p, deflection(analysis_links(cfg, p, d))};
      },
      exec);
}

std::vector<RocRow> roc_curve(const ScenarioConfig& cfg, const std::vector<double>& deltas, Execution exec) {
  const double gamma = analysis_threshold(cfg);
  double p = 0.0;
  for (const auto& v : links_of(cfg))
    if (v.profile) p = v.profile->p;
  return fan_out<RocRow>(
      deltas.size(),
      [&](std::size_t i) {
        const auto r = transient_pd_pfa(gamma, analysis_neighbors(cfg, deltas[i]));
        return RocRow{deltas[i], p, r.pd, r.pfa};
      },
      exec);
}

SampleMoments monte_carlo_link(std::size_t L, double sigma2, double h, double y_k, double y_j,
                               std::size_t windows, std::uint64_t seed, Execution exec) {
  if (windows < 2) throw Error(ErrorCode::InvalidArgument, "need at least two windows");
  const auto t = fan_out<double>(
      windows,
      [&](std::size_t i) {
        auto rng = make_stream(seed, StreamPurpose::Sweep, i);
        std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
        double s = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
          const double d = h * y_k + noise(rng) - y_j;
          s += d * d;
        }
        return s;
      },
      exec);
  SampleMoments m;
  for (double v : t) m.mean += v;
  m.mean /= static_cast<double>(windows);
  for (double v : t) m.variance += (v - m.mean) * (v - m.mean);
  m.variance /= static_cast<double>(windows - 1);
  return m;
}

std::vector<double> synthetic_windows(const SyntheticLink& link, Hypothesis hyp, std::size_t windows,
                                      std::uint64_t seed) {
  auto rng = make_stream(seed, StreamPurpose::Synthetic, static_cast<std::uint64_t>(hyp));
  std::normal_distribution<double> noise(0.0, std::sqrt(link.sigma2));
  const double yk = hyp == Hypothesis::H0 ? link.y_j : link.y_k;
  const double offset = hyp == Hypothesis::H0 ? link.delta : -link.delta;
  std::vector<double> out;
  out.reserve(windows);
  for (std::size_t w = 0; w < windows; ++w) {
    const double sent = uniform01(rng) < link.p ? yk + offset : yk;
    double s = 0.0;
    for (std::size_t l = 0; l < link.L; ++l) {
      const double d = link.h * sent + noise(rng) - link.y_j;
      s += d * d;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace byzsync
