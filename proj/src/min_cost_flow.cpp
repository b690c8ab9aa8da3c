#include "opbm/min_cost_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "opbm/errors.hpp"
#include "opbm/numeric.hpp"

namespace opbm::mcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual graph with xor-paired arcs: arcs[i ^ 1] is the reverse of arcs[i].
struct ResidualGraph {
  struct Arc {
    int to;
    std::int64_t cap;
    double cost;
  };

  explicit ResidualGraph(int nodes) : adj(nodes) {}

  void add_edge(int from, int to, std::int64_t cap, double cost) {
    adj[from].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({to, cap, cost});
    adj[to].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({from, 0, -cost});
  }

  std::vector<std::vector<int>> adj;
  std::vector<Arc> arcs;
};

// Successive shortest paths with potentials. Costs are negated utilities, so
// the initial graph has non-positive arc costs; potentials are seeded with a
// few Bellman passes (the graph is a 3-layer DAG), after which Dijkstra on
// clamped reduced costs applies. Augments the full bottleneck per path.
struct SspSolver {
  ResidualGraph& g;
  int source;
  int sink;
  std::vector<double> potential;
  std::vector<double> dist;
  std::vector<int> parent_arc;

  SspSolver(ResidualGraph& graph, int s, int t)
      : g(graph), source(s), sink(t), potential(g.adj.size(), 0.0),
        dist(g.adj.size()), parent_arc(g.adj.size()) {
    seed_potentials();
  }

  void seed_potentials() {
    const int n = static_cast<int>(g.adj.size());
    std::vector<double> d(n, kInf);
    d[source] = 0.0;
    for (int pass = 0; pass < 4; ++pass) {
      bool changed = false;
      for (int u = 0; u < n; ++u) {
        if (d[u] == kInf) continue;
        for (int ai : g.adj[u]) {
          const auto& a = g.arcs[ai];
          if (a.cap <= 0) continue;
          if (d[u] + a.cost < d[a.to]) {
            d[a.to] = d[u] + a.cost;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    for (int u = 0; u < n; ++u) potential[u] = (d[u] == kInf) ? 0.0 : d[u];
  }

  // Returns true when the sink is reachable; fills dist/parent_arc.
  bool shortest_path() {
    const int n = static_cast<int>(g.adj.size());
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent_arc.begin(), parent_arc.end(), -1);
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.push({0.0, source});
    std::vector<char> done(n, 0);
    while (!heap.empty()) {
      auto [du, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      for (int ai : g.adj[u]) {
        const auto& a = g.arcs[ai];
        if (a.cap <= 0 || done[a.to]) continue;
        double rc = a.cost + potential[u] - potential[a.to];
        if (rc < 0.0) rc = 0.0;  // floating-point noise only
        double nd = du + rc;
        if (nd < dist[a.to]) {
          dist[a.to] = nd;
          parent_arc[a.to] = ai;
          heap.push({nd, a.to});
        }
      }
    }
    return dist[sink] != kInf;
  }

  void update_potentials() {
    double dt = dist[sink];
    for (std::size_t u = 0; u < dist.size(); ++u) {
      potential[u] += std::min(dist[u], dt);
    }
  }

  std::int64_t augment() {
    std::int64_t bottleneck = std::numeric_limits<std::int64_t>::max();
    for (int v = sink; v != source;) {
      const auto& a = g.arcs[parent_arc[v]];
      bottleneck = std::min(bottleneck, a.cap);
      v = g.arcs[parent_arc[v] ^ 1].to;
    }
    for (int v = sink; v != source;) {
      int ai = parent_arc[v];
      g.arcs[ai].cap -= bottleneck;
      g.arcs[ai ^ 1].cap += bottleneck;
      v = g.arcs[ai ^ 1].to;
    }
    return bottleneck;
  }

  // True path cost in original (non-reduced) units for the found path.
  double path_cost() const { return dist[sink] + potential[sink] - potential[source]; }
};

}  // namespace

TransportResult solve_transport_max(int rows, int cols, const std::vector<double>& utility,
                                    const std::vector<std::int64_t>& supply,
                                    const std::vector<std::int64_t>& demand) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("transportation needs rows, cols >= 1");
  if (utility.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("utility matrix size mismatch");
  }
  std::int64_t total_supply = 0, total_demand = 0;
  for (auto s : supply) total_supply += s;
  for (auto d : demand) total_demand += d;
  if (total_supply != total_demand) {
    throw std::invalid_argument("transportation requires total supply == total demand");
  }

  const int source = 0;
  const int sink = rows + cols + 1;
  ResidualGraph g(rows + cols + 2);
  for (int i = 0; i < rows; ++i) g.add_edge(source, 1 + i, supply[i], 0.0);
  std::vector<int> cell_arc(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      // The LP has no per-edge capacity; an uncapped arc (never saturated)
      // keeps the final potentials dual-feasible on every edge, which is what
      // the certificate checks. Conservation is enforced by the source and
      // sink arcs alone.
      std::int64_t cap = total_supply + 1;
      cell_arc[static_cast<std::size_t>(i) * cols + j] = static_cast<int>(g.arcs.size());
      g.add_edge(1 + i, 1 + rows + j, cap, -utility[static_cast<std::size_t>(i) * cols + j]);
    }
  }
  for (int j = 0; j < cols; ++j) g.add_edge(1 + rows + j, sink, demand[j], 0.0);

  SspSolver ssp(g, source, sink);
  std::int64_t shipped = 0;
  while (shipped < total_supply) {
    if (!ssp.shortest_path()) {
      throw Error("transportation problem unexpectedly infeasible");
    }
    ssp.update_potentials();
    shipped += ssp.augment();
  }

  TransportResult out;
  out.shipped = shipped;
  out.flow.resize(static_cast<std::size_t>(rows) * cols);
  KahanSum objective;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      std::size_t idx = static_cast<std::size_t>(i) * cols + j;
      std::int64_t f = g.arcs[cell_arc[idx] ^ 1].cap;  // reverse cap == shipped units
      out.flow[idx] = f;
      if (f > 0) objective.add(utility[idx] * static_cast<double>(f));
    }
  }
  out.objective = objective.value();
  out.row_potentials.resize(rows);
  out.col_potentials.resize(cols);
  for (int i = 0; i < rows; ++i) out.row_potentials[i] = ssp.potential[1 + i];
  for (int j = 0; j < cols; ++j) out.col_potentials[j] = -ssp.potential[1 + rows + j];

  double scale = 1.0;
  for (double u : utility) scale = std::max(scale, std::abs(u));
  if (!check_certificate(rows, cols, utility, out.flow, out.row_potentials, out.col_potentials,
                         1e-9 * scale)) {
    throw Error("transportation optimality certificate failed");
  }
  return out;
}

bool check_certificate(int rows, int cols, const std::vector<double>& utility,
                       const std::vector<std::int64_t>& flow,
                       const std::vector<double>& row_potentials,
                       const std::vector<double>& col_potentials, double tolerance) {
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      std::size_t idx = static_cast<std::size_t>(i) * cols + j;
      double slack = row_potentials[i] + col_potentials[j] - utility[idx];
      if (slack < -tolerance) return false;                   // dual feasibility
      if (flow[idx] > 0 && slack > tolerance) return false;   // complementary slackness
    }
  }
  return true;
}

double max_profit_value(int rows, int cols, const std::vector<SparseArc>& arcs,
                        const std::vector<std::int64_t>& supply,
                        const std::vector<std::int64_t>& demand) {
  if (arcs.empty()) return 0.0;

  // Compact to the rows/cols actually touched by an arc.
  std::vector<int> row_id(rows, -1), col_id(cols, -1);
  std::vector<int> row_of, col_of;
  for (const auto& a : arcs) {
    if (row_id[a.row] < 0) {
      row_id[a.row] = static_cast<int>(row_of.size());
      row_of.push_back(a.row);
    }
    if (col_id[a.col] < 0) {
      col_id[a.col] = static_cast<int>(col_of.size());
      col_of.push_back(a.col);
    }
  }
  const int r = static_cast<int>(row_of.size());
  const int c = static_cast<int>(col_of.size());
  const int source = 0;
  const int sink = r + c + 1;
  ResidualGraph g(r + c + 2);
  for (int i = 0; i < r; ++i) g.add_edge(source, 1 + i, supply[row_of[i]], 0.0);
  double scale = 1.0;
  std::vector<int> cell_arc(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    std::int64_t cap = std::min(supply[arcs[a].row], demand[arcs[a].col]);
    cell_arc[a] = static_cast<int>(g.arcs.size());
    g.add_edge(1 + row_id[arcs[a].row], 1 + r + col_id[arcs[a].col], cap, -arcs[a].utility);
    scale = std::max(scale, std::abs(arcs[a].utility));
  }
  for (int j = 0; j < c; ++j) g.add_edge(1 + r + j, sink, demand[col_of[j]], 0.0);

  const double eps = 1e-12 * scale;
  SspSolver ssp(g, source, sink);
  while (true) {
    if (!ssp.shortest_path()) break;
    if (ssp.path_cost() >= -eps) break;
    ssp.update_potentials();
    ssp.augment();
  }
  KahanSum profit;
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    std::int64_t f = g.arcs[cell_arc[a] ^ 1].cap;
    if (f > 0) profit.add(arcs[a].utility * static_cast<double>(f));
  }
  return profit.value();
}

}  // namespace opbm::mcf
