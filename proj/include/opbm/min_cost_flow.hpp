#pragma once

#include <cstdint>
#include <vector>

namespace opbm::mcf {

/// One positive-utility edge of a bipartite transportation problem.
struct SparseArc {
  int row;
  int col;
  double utility;
};

struct TransportResult {
  std::vector<std::int64_t> flow;      // rows*cols, row-major
  double objective = 0.0;              // sum of utility * flow
  std::vector<double> row_potentials;  // alpha_i
  std::vector<double> col_potentials;  // beta_j; alpha_i + beta_j >= u_ij
  std::int64_t shipped = 0;
};

/// Maximum-utility transportation on the complete bipartite graph: every
/// (row, col) pair is an edge. Ships all supply (total supply must equal
/// total demand); returns integral flows plus dual potentials satisfying
/// complementary slackness within a 1e-9 relative slack. Successive shortest
/// augmenting paths with potentials; shortest-path ties break toward the
/// lowest node index.
TransportResult solve_transport_max(int rows, int cols, const std::vector<double>& utility,
                                    const std::vector<std::int64_t>& supply,
                                    const std::vector<std::int64_t>& demand);

/// Maximum-profit partial shipment over an explicit arc list: augments only
/// while the best path has strictly positive utility, so zero-utility edges
/// may be omitted entirely. Returns the optimal objective value.
double max_profit_value(int rows, int cols, const std::vector<SparseArc>& arcs,
                        const std::vector<std::int64_t>& supply,
                        const std::vector<std::int64_t>& demand);

/// Verifies dual feasibility and complementary slackness of a dense solution.
bool check_certificate(int rows, int cols, const std::vector<double>& utility,
                       const std::vector<std::int64_t>& flow,
                       const std::vector<double>& row_potentials,
                       const std::vector<double>& col_potentials, double tolerance);

}  // namespace opbm::mcf
