#include "evoplan/oracle.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace evoplan {

namespace {

bool prefix_ok(const std::vector<Period>& d, int n, Period horizon) {
  for (Period k = 1; k <= horizon; ++k) {
    long due = 0;
    for (Period x : d) due += x <= k;
    if (due > static_cast<long>(k) * n) return false;
  }
  return true;
}

struct Enumerator {
  std::span<const Period> deadlines;
  int n;
  std::vector<int> used;
  std::vector<Period> current;
  OracleSchedule best;

  void go(std::size_t i, long late) {
    if (i == deadlines.size()) {
      if (!best.feasible || late < best.lateness) best = {true, late, current};
      return;
    }
    for (Period h = 1; h <= deadlines[i]; ++h) {
      if (used[static_cast<std::size_t>(h)] >= n) continue;
      ++used[static_cast<std::size_t>(h)];
      current[i] = h;
      go(i + 1, late + (deadlines[i] - h));
      --used[static_cast<std::size_t>(h)];
    }
  }
};

}  // namespace

OracleSchedule oracle_schedule(std::span<const Period> deadlines, int change_rate, Period horizon,
                               const OracleBudget& budget) {
  if (deadlines.size() > budget.max_requests) {
    throw BudgetExceeded("oracle budget exceeded: " + std::to_string(deadlines.size()) + " requests (max " +
                         std::to_string(budget.max_requests) + ")");
  }
  if (horizon > budget.max_horizon) {
    throw BudgetExceeded("oracle budget exceeded: horizon " + std::to_string(horizon) + " (max " +
                         std::to_string(budget.max_horizon) + ")");
  }
  for (Period d : deadlines) {
    if (d < 1 || d > horizon) throw std::invalid_argument("deadline outside [1, K]");
  }
  Enumerator e{deadlines, change_rate, std::vector<int>(static_cast<std::size_t>(horizon) + 1, 0),
               std::vector<Period>(deadlines.size(), 0), {}};
  e.go(0, 0);
  return e.best;
}

std::vector<std::vector<Period>> oracle_feasible_sets(Period horizon, int change_rate, std::size_t count,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Period>> out;
  if (horizon < 1) return out;
  const long cap = static_cast<long>(horizon) * std::max(change_rate, 0);
  std::uniform_int_distribution<long> size_dist(0, cap);
  std::uniform_int_distribution<Period> deadline_dist(1, horizon);
  while (out.size() < count) {
    const long size = size_dist(rng);
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::vector<Period> d(static_cast<std::size_t>(size));
      for (Period& x : d) x = deadline_dist(rng);
      if (!prefix_ok(d, change_rate, horizon)) continue;
      std::sort(d.begin(), d.end());
      out.push_back(std::move(d));
      break;
    }
  }
  return out;
}

namespace {

// Joint state: one type index per station, packed little-endian in base |T|.
struct Model {
  const Scenario& sc;
  Mode mode;
  std::size_t B, C, O, T, K;
  std::vector<std::vector<double>> dist;  // [b][c]

  explicit Model(const Scenario& s, Mode m)
      : sc(s),
        mode(m),
        B(s.num_stations()),
        C(s.num_clusters()),
        O(s.num_operators()),
        T(s.types().size()),
        K(static_cast<std::size_t>(s.horizon())) {
    for (std::size_t b = 0; b < B; ++b) {
      const auto& st = s.stations()[b];
      std::vector<double> row;
      for (std::size_t c = 0; c < C; ++c) {
        const auto& cl = s.clusters()[c];
        row.push_back(std::hypot(cl.x - st.x, cl.y - st.y));
      }
      dist.push_back(std::move(row));
    }
  }

  bool covers(std::size_t b, std::size_t c, std::size_t t) const {
    const double r = sc.types().types()[t].radius_km;
    return r > 0.0 && dist[b][c] <= r;
  }

  double tau(std::size_t c, Period k, std::size_t o) const {
    return sc.input().demand[(c * K + static_cast<std::size_t>(k - 1)) * O + o];
  }

  double tau_total(std::size_t c, Period k) const {
    double s = 0.0;
    for (std::size_t o = 0; o < O; ++o) s += tau(c, k, o);
    return s;
  }

  // Demand the station splits its capacity by: everything in shared mode,
  // the owner's subscribers otherwise.
  double weight(std::size_t b, std::size_t c, Period k) const {
    return mode == Mode::shared ? tau_total(c, k) : tau(c, k, idx(sc.stations()[b].owner));
  }

  double hhi(double sigma, const std::vector<double>& parts) const {
    if (!(sigma > 0.0)) return 2.0;  // never compliant
    double t = 0.0;
    for (double p : parts) t += p;
    double spare = (sigma - t) / sigma;
    if (spare < 0.0) spare = 0.0;
    double h = spare * spare;
    for (double p : parts) h += (p / sigma) * (p / sigma);
    return h;
  }

  // Goals 1 and 2 at period k for the given station types.
  bool goals(const std::vector<std::size_t>& types, Period k) const {
    std::vector<double> sigma(C, 0.0);
    std::vector<double> sigma_op(C * O, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t t = types[b];
        if (!covers(b, c, t)) continue;
        double load = 0.0;
        std::size_t n = 0;
        for (std::size_t c2 : reach_order(b)) {
          if (!covers(b, c2, t)) continue;
          load += weight(b, c2, k);
          ++n;
        }
        const double cap = sc.types().types()[t].capacity;
        const double v = load > 0.0 ? cap * (weight(b, c, k) / load) : cap / static_cast<double>(n);
        if (v == 0.0) continue;
        sigma[c] += v;
        if (mode == Mode::independent) sigma_op[c * O + idx(sc.stations()[b].owner)] += v;
      }
    }
    std::size_t counted = 0;
    std::size_t compliant = 0;
    for (std::size_t c = 0; c < C; ++c) {
      const double total = tau_total(c, k);
      if (mode == Mode::shared) {
        if (sigma[c] < total) return false;
      } else {
        for (std::size_t o = 0; o < O; ++o) {
          if (sigma_op[c * O + o] < tau(c, k, o)) return false;
        }
      }
      if (!(total > 0.0)) continue;
      ++counted;
      std::vector<double> parts;
      if (mode == Mode::shared) {
        parts.push_back(total);
      } else {
        for (std::size_t o = 0; o < O; ++o) parts.push_back(tau(c, k, o));
      }
      if (hhi(sigma[c], parts) <= sc.h_max()) ++compliant;
    }
    return static_cast<double>(compliant) + 1e-9 >= sc.phi() * static_cast<double>(counted);
  }

  // Covered clusters in the order the reference sums loads: by distance, then id.
  std::vector<std::size_t> reach_order(std::size_t b) const {
    std::vector<std::size_t> order(C);
    for (std::size_t c = 0; c < C; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return dist[b][x] < dist[b][y]; });
    return order;
  }

  double cost(const std::vector<std::size_t>& types) const {
    double s = 0.0;
    for (std::size_t b = 0; b < B; ++b) s += sc.cost(make_id<StationId>(b), make_id<TypeId>(types[b]));
    return s;
  }

  std::size_t group(std::size_t b) const { return mode == Mode::shared ? 0 : idx(sc.stations()[b].owner); }
  std::size_t groups() const { return mode == Mode::shared ? 1 : O; }
};

std::uint64_t pack(const std::vector<std::size_t>& v, std::size_t base) {
  std::uint64_t key = 0;
  for (std::size_t i = v.size(); i-- > 0;) key = key * base + v[i];
  return key;
}

std::vector<std::size_t> unpack(std::uint64_t key, std::size_t n, std::size_t base) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = key % base;
    key /= base;
  }
  return v;
}

}  // namespace

OracleCost oracle_min_cost_plan(const Scenario& sc, Mode mode, const OracleBudget& budget) {
  if (sc.num_stations() > budget.max_stations || sc.num_clusters() > budget.max_clusters ||
      sc.horizon() > budget.max_horizon) {
    throw BudgetExceeded("oracle budget exceeded: " + std::to_string(sc.num_stations()) + " stations, " +
                         std::to_string(sc.num_clusters()) + " clusters, K=" + std::to_string(sc.horizon()) +
                         " (max " + std::to_string(budget.max_stations) + ", " + std::to_string(budget.max_clusters) +
                         ", " + std::to_string(budget.max_horizon) + ")");
  }
  const Model m(sc, mode);
  const int n = sc.change_rate();
  std::vector<std::size_t> start(m.B);
  for (std::size_t b = 0; b < m.B; ++b) start[b] = idx(sc.stations()[b].initial);

  struct Entry {
    double cost;
    std::uint64_t parent;
  };
  // layers[k] maps reachable feasible states at period k to their best cost.
  std::vector<std::map<std::uint64_t, Entry>> layers(m.K + 1);
  layers[0][pack(start, m.T)] = {0.0, 0};

  for (Period k = 1; k <= sc.horizon(); ++k) {
    auto& next = layers[static_cast<std::size_t>(k)];
    std::map<std::uint64_t, bool> verdict;
    for (const auto& [key, entry] : layers[static_cast<std::size_t>(k - 1)]) {
      const std::vector<std::size_t> from = unpack(key, m.B, m.T);
      std::vector<std::size_t> to = from;
      std::vector<int> used(m.groups(), 0);
      // Depth-first over per-station choices: keep the type or move to a
      // successor the station allows, within each group's budget.
      auto visit = [&](auto&& self, std::size_t b) -> void {
        if (b == m.B) {
          const std::uint64_t nk = pack(to, m.T);
          auto v = verdict.find(nk);
          if (v == verdict.end()) v = verdict.emplace(nk, m.goals(to, k)).first;
          if (!v->second) return;
          const double c = entry.cost + m.cost(to);
          auto it = next.find(nk);
          if (it == next.end() || c < it->second.cost) next[nk] = {c, key};
          return;
        }
        self(self, b + 1);
        const std::size_t g = m.group(b);
        if (used[g] >= n) return;
        for (TypeId s : sc.types()[make_id<TypeId>(from[b])].successors) {
          const auto& allowed = sc.stations()[b].allowed;
          if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) continue;
          to[b] = idx(s);
          ++used[g];
          self(self, b + 1);
          --used[g];
        }
        to[b] = from[b];
      };
      visit(visit, 0);
    }
    if (next.empty()) return {};
  }

  const auto& last = layers[m.K];
  auto best = last.begin();
  for (auto it = last.begin(); it != last.end(); ++it) {
    if (it->second.cost < best->second.cost) best = it;
  }
  OracleCost out{true, best->second.cost, {}};
  std::uint64_t key = best->first;
  for (Period k = sc.horizon(); k >= 1; --k) {
    const std::uint64_t parent = layers[static_cast<std::size_t>(k)].at(key).parent;
    const auto a = unpack(parent, m.B, m.T);
    const auto b = unpack(key, m.B, m.T);
    for (std::size_t s = 0; s < m.B; ++s) {
      if (a[s] != b[s]) out.schedule.push_back({make_id<StationId>(s), k, make_id<TypeId>(b[s])});
    }
    key = parent;
  }
  std::sort(out.schedule.begin(), out.schedule.end(), [](const Change& x, const Change& y) {
    return x.period != y.period ? x.period < y.period : x.station < y.station;
  });
  return out;
}

}  // namespace evoplan
