#include "evoplan/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace evoplan {

void check_params(const GeneratorParams& p) {
  if (p.stations == 0 || p.clusters == 0 || p.operators == 0) {
    throw std::invalid_argument("station, cluster and operator counts must be positive");
  }
  if (!(p.area_km > 0.0)) throw std::invalid_argument("area must be positive");
  if (!(p.growth >= 1.0) || !std::isfinite(p.growth)) throw std::invalid_argument("growth factor must be >= 1");
  if (p.horizon < 2) throw std::invalid_argument("horizon must be at least 2 periods");
  if (p.change_rate < 0) throw std::invalid_argument("change rate must be >= 0");
  if (!(p.h_max >= 0.0 && p.h_max <= 1.0)) throw std::invalid_argument("h_max must lie in [0,1]");
  if (!(p.phi >= 0.0 && p.phi <= 1.0)) throw std::invalid_argument("phi must lie in [0,1]");
  if (!(p.market_lead >= 0.0)) throw std::invalid_argument("market lead must be non-negative");
  if (!(p.colocation_share >= 0.0 && p.colocation_share <= 1.0)) throw std::invalid_argument("colocation share must lie in [0,1]");
  if (!(p.initial_headroom > 0.0) || !(p.final_margin > 0.0)) throw std::invalid_argument("headroom and margin must be positive");
  if (!(p.headroom_quantile >= 0.0 && p.headroom_quantile <= 1.0)) throw std::invalid_argument("headroom quantile must lie in [0,1]");
  if (!(p.demand_balance >= 0.0 && p.demand_balance <= 1.0)) throw std::invalid_argument("demand balance must lie in [0,1]");
  if (!p.types.find(p.legacy_type)) throw std::invalid_argument("type table has no legacy type '" + p.legacy_type + "'");
}

namespace {

struct Point {
  double x;
  double y;
};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  double lognormal(double sigma) { return std::lognormal_distribution<double>(0.0, sigma)(rng_); }

  Point in_disk(Point centre, double radius) {
    const double r = radius * std::sqrt(uniform(0.0, 1.0));
    const double a = uniform(0.0, 2.0 * std::numbers::pi);
    return {centre.x + r * std::cos(a), centre.y + r * std::sin(a)};
  }

 private:
  std::mt19937_64 rng_;
};

std::string numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", prefix, i + 1);
  return buf;
}

// Types reachable from `from` through the change graph, `from` excluded.
std::vector<TypeId> closure(const TypeTable& types, TypeId from, TypeId exclude) {
  std::vector<char> seen(types.size(), 0);
  std::vector<TypeId> stack{from};
  std::vector<TypeId> out;
  seen[idx(from)] = 1;
  while (!stack.empty()) {
    const TypeId t = stack.back();
    stack.pop_back();
    for (TypeId s : types[t].successors) {
      if (seen[idx(s)] || s == exclude) continue;
      seen[idx(s)] = 1;
      out.push_back(s);
      stack.push_back(s);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Per-(station, type) covered demand at one period, all operators and per owner.
struct Loads {
  std::vector<double> all;
  std::vector<double> own;
};

}  // namespace

Scenario generate(const GeneratorParams& p) {
  check_params(p);
  Sampler rng(p.seed);
  const TypeTable& types = p.types;
  const TypeId off = types.off();
  const TypeId legacy = *types.find(p.legacy_type);
  const std::vector<TypeId> lte = closure(types, off, legacy);
  double lte_radius = 0.0;
  for (TypeId t : lte) lte_radius = std::max(lte_radius, types[t].radius_km);
  const double legacy_radius = types[legacy].radius_km;

  std::vector<Point> centres(p.urban_centers);
  for (auto& c : centres) c = {rng.uniform(0.15, 0.85) * p.area_km, rng.uniform(0.15, 0.85) * p.area_km};

  auto draw = [&](double urban_share, bool& urban) -> Point {
    urban = !centres.empty() && rng.chance(urban_share);
    if (urban) return rng.in_disk(centres[rng.index(centres.size())], p.urban_radius_km);
    return {rng.uniform(0.0, p.area_km), rng.uniform(0.0, p.area_km)};
  };

  ScenarioInput in;
  in.types = types;
  for (std::size_t o = 0; o < p.operators; ++o) in.operators.push_back("op" + std::to_string(o + 1));
  in.horizon = p.horizon;
  in.change_rate = p.change_rate;
  in.h_max = p.h_max;
  in.phi = p.phi;

  std::vector<Point> sites;
  std::vector<char> has_candidate;
  for (std::size_t i = 0; i < p.stations; ++i) {
    bool urban = false;
    const auto owner = make_id<OperatorId>(i % p.operators);
    Point at = draw(p.urban_station_share, urban);
    if (idx(owner) > 0 && rng.chance(p.colocation_share)) {
      // Next to the matching site of the previous operator.
      at = rng.in_disk(sites[i - 1], p.colocation_radius_km);
    }
    in.stations.push_back({numbered('S', i), at.x, at.y, legacy, owner, {legacy, off}});
    sites.push_back(at);
    const bool candidate = rng.chance(p.lte_candidate_share);
    has_candidate.push_back(candidate);
    if (candidate) {
      std::vector<TypeId> allowed = lte;
      allowed.push_back(off);
      in.stations.push_back({numbered('S', i) + "-L", at.x, at.y, off, owner, std::move(allowed)});
    }
  }

  // Clusters must sit within LTE reach of some candidate site (or legacy
  // reach when there are no candidates) so every demand can grow.
  const double reach = lte.empty() ? legacy_radius : std::min(lte_radius, legacy_radius);
  auto reachable = [&](Point q) {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if ((has_candidate[i] || lte.empty()) && std::hypot(sites[i].x - q.x, sites[i].y - q.y) <= reach) return true;
    }
    return false;
  };
  std::vector<double> weight;
  for (std::size_t i = 0; i < p.clusters; ++i) {
    bool urban = false;
    Point at{};
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      at = draw(p.urban_cluster_share, urban);
      placed = reachable(at);
    }
    if (!placed) {
      std::size_t s = rng.index(sites.size());
      for (std::size_t j = 0; j < sites.size() && !has_candidate[s] && !lte.empty(); ++j) s = (s + 1) % sites.size();
      at = rng.in_disk(sites[s], 0.9 * reach);
      urban = false;
    }
    in.clusters.push_back({numbered('C', i), at.x, at.y});
    weight.push_back((urban ? p.urban_demand_weight : 1.0) * rng.lognormal(0.5));
  }

  // Period-1 demand per (cluster, operator): base weight times a jittered market share.
  const std::size_t C = in.clusters.size();
  const std::size_t O = p.operators;
  std::vector<double> tau1(C * O, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    double norm = 0.0;
    std::vector<double> share(O);
    for (std::size_t o = 0; o < O; ++o) {
      const double market = 1.0 + p.market_lead * static_cast<double>(O - 1 - o);
      share[o] = market * rng.uniform(0.7, 1.3);
      norm += share[o];
    }
    for (std::size_t o = 0; o < O; ++o) tau1[c * O + o] = weight[c] * share[o] / norm;
  }

  // Geometry only: one period with the period-1 demand.
  ScenarioInput probe_in = in;
  probe_in.horizon = 1;
  probe_in.demand = tau1;
  const Scenario probe(std::move(probe_in));
  const std::size_t B = probe.num_stations();
  const std::size_t T = types.size();

  auto compute_loads = [&](const std::vector<double>& tau) {
    Loads l{std::vector<double>(B * T, 0.0), std::vector<double>(B * T, 0.0)};
    for (std::size_t b = 0; b < B; ++b) {
      const auto id = make_id<StationId>(b);
      const auto owner = idx(probe.station(id).owner);
      for (TypeId t : probe.station(id).allowed) {
        if (t == off) continue;
        double all = 0.0;
        double own = 0.0;
        for (const auto& e : probe.coverage(id, t)) {
          for (std::size_t o = 0; o < O; ++o) all += tau[idx(e.cluster) * O + o];
          own += tau[idx(e.cluster) * O + owner];
        }
        l.all[b * T + idx(t)] = all;
        l.own[b * T + idx(t)] = own;
      }
    }
    return l;
  };

  // Operator-owned or pooled capacity-to-load ratio reachable at cluster c:
  // each covering station contributes its best type. `fixed` restricts to the
  // station's initial type (period-1 headroom). Also reports the station and
  // type with the largest single contribution.
  struct Ratio {
    double value = 0.0;
    StationId station{};
    TypeId type{};
    double best = 0.0;
  };
  auto ratio_at = [&](const Loads& l, std::size_t c, std::optional<std::size_t> owner, bool fixed) {
    Ratio r;
    for (const auto& cr : probe.candidates(make_id<ClusterId>(c))) {
      const auto& s = probe.station(cr.station);
      if (owner && idx(s.owner) != *owner) continue;
      double best = 0.0;
      TypeId best_t = off;
      for (TypeId t : s.allowed) {
        if (t == off || (fixed && t != s.initial) || !probe.covers_at(cr.distance, t)) continue;
        const double load = (owner ? l.own : l.all)[idx(cr.station) * T + idx(t)];
        if (load > 0.0 && types[t].capacity / load > best) {
          best = types[t].capacity / load;
          best_t = t;
        }
      }
      r.value += best;
      if (best > r.best) r = {r.value, cr.station, best_t, best};
    }
    return r;
  };
  auto ratio = [&](const Loads& l, std::size_t c, std::optional<std::size_t> owner, bool fixed) {
    return ratio_at(l, c, owner, fixed).value;
  };

  // An operator only has subscribers where it serves them today (own legacy
  // coverage) and can grow capacity (own non-legacy reach).
  if (!lte.empty()) {
    for (std::size_t c = 0; c < C; ++c) {
      std::vector<char> today(O, 0);
      std::vector<char> growable(O, 0);
      for (const auto& cr : probe.candidates(make_id<ClusterId>(c))) {
        const auto& s = probe.station(cr.station);
        for (TypeId t : s.allowed) {
          if (t == off || !probe.covers_at(cr.distance, t)) continue;
          (t == legacy ? today : growable)[idx(s.owner)] = 1;
        }
      }
      for (std::size_t o = 0; o < O; ++o) {
        if (!today[o] || !growable[o]) tau1[c * O + o] = 0.0;
      }
    }
  }

  // Dimensioning: pull each cluster's demand towards what its covering
  // stations carry, so period-1 ratios cluster around their median.
  if (p.demand_balance > 0.0) {
    for (int round = 0; round < 30; ++round) {
      const Loads l = compute_loads(tau1);
      std::vector<double> r(C, 0.0);
      double log_sum = 0.0;
      std::size_t n = 0;
      for (std::size_t c = 0; c < C; ++c) {
        double v = std::numeric_limits<double>::infinity();
        for (std::size_t o = 0; o < O; ++o) {
          if (tau1[c * O + o] > 0.0) v = std::min(v, ratio(l, c, o, true));
        }
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        r[c] = v;
        log_sum += std::log(v);
        ++n;
      }
      if (n == 0) break;
      const double centre = std::exp(log_sum / static_cast<double>(n));
      // Dividing by the mean factor keeps the overall level from drifting.
      std::vector<double> f(C, 1.0);
      double f_log = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        if (!(r[c] > 0.0)) continue;
        f[c] = std::clamp(std::pow(r[c] / centre, 0.5 * p.demand_balance), 0.8, 1.25);
        f_log += std::log(f[c]);
      }
      const double mean_f = std::exp(f_log / static_cast<double>(n));
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t o = 0; o < O; ++o) tau1[c * O + o] *= f[c] / mean_f;
      }
    }
  }

  {
    const Loads l = compute_loads(tau1);
    std::vector<double> r;
    for (std::size_t c = 0; c < C; ++c) {
      double v = ratio(l, c, std::nullopt, true);
      for (std::size_t o = 0; o < O; ++o) {
        if (tau1[c * O + o] > 0.0) v = std::min(v, ratio(l, c, o, true));
      }
      if (v > 0.0) r.push_back(v);
    }
    if (!r.empty()) {
      const auto q = std::min(r.size() - 1, static_cast<std::size_t>(p.headroom_quantile * static_cast<double>(r.size())));
      std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(q), r.end());
      const double scale = r[q] / p.initial_headroom;
      for (double& v : tau1) v *= scale;
    }
  }

  // Shrink demand where the network cannot carry it at period K with every
  // station on its strongest type: a deficit at c scales down every cluster
  // served by the station that contributes most to c, so that station's load
  // and its share of c's ratio move by the same factor. At period 1 with the
  // initial types a deficit instead removes the operator's subscribers at c.
  auto shrink = [&](double growth, bool fixed, double margin) {
    for (int round = 0; round < 200; ++round) {
      std::vector<double> scaled = tau1;
      for (double& v : scaled) v *= growth;
      const Loads l = compute_loads(scaled);
      std::vector<double> factor(C, 1.0);
      bool changed = false;
      for (std::size_t c = 0; c < C; ++c) {
        Ratio worst = ratio_at(l, c, std::nullopt, fixed);
        for (std::size_t o = 0; o < O; ++o) {
          if (!(tau1[c * O + o] > 0.0)) continue;
          const Ratio r = ratio_at(l, c, o, fixed);
          if (r.value == 0.0 || (fixed && r.value < margin)) {
            // The operator cannot serve subscribers here with its own network.
            tau1[c * O + o] = 0.0;
            changed = true;
            continue;
          }
          if (r.value < worst.value) worst = r;
        }
        if (fixed && worst.value < margin) {
          for (std::size_t o = 0; o < O; ++o) tau1[c * O + o] = 0.0;
          changed = true;
          continue;
        }
        const double need = worst.value / margin;
        if (!(need < 1.0) || !(worst.best > 0.0)) continue;
        const double f = need * 0.999;
        for (const auto& e : probe.coverage(worst.station, worst.type)) {
          factor[idx(e.cluster)] = std::min(factor[idx(e.cluster)], f);
        }
      }
      for (std::size_t c = 0; c < C; ++c) {
        if (factor[c] == 1.0) continue;
        for (std::size_t o = 0; o < O; ++o) tau1[c * O + o] *= factor[c];
        changed = true;
      }
      if (!changed) break;
    }
  };
  shrink(p.growth, false, p.final_margin);
  shrink(1.0, true, 1.0);

  const auto K = static_cast<std::size_t>(p.horizon);
  in.demand.assign(C * K * O, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      const double factor = std::pow(p.growth, static_cast<double>(k) / static_cast<double>(K - 1));
      for (std::size_t o = 0; o < O; ++o) in.demand[(c * K + k) * O + o] = tau1[c * O + o] * factor;
    }
  }
  return Scenario(std::move(in));
}

}  // namespace evoplan
