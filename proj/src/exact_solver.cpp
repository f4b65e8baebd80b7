#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "bw/transport.hpp"

namespace bw {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGapTol = 1e-9;
}  // namespace

/* Shortest-augmenting-path assignment with dual potentials (dense,
   O(n^3)).  Maintains u_i + v_j <= cost_ij throughout, equality on
   matched pairs, so the potentials certify optimality. */
std::vector<int> solve_assignment(const Matrix& cost, double* value, Vector* u_out,
                                  Vector* v_out) {
  const int n = int(cost.rows());
  if (cost.cols() != n) throw input_error("assignment requires a square cost");
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j)
        if (!used[j]) {
          double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j) match[std::size_t(p[j] - 1)] = j - 1;
  if (value) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost(i, match[std::size_t(i)]);
    *value = s;
  }
  if (u_out) {
    u_out->resize(n);
    for (int i = 0; i < n; ++i) (*u_out)[i] = u[std::size_t(i) + 1];
  }
  if (v_out) {
    v_out->resize(n);
    for (int j = 0; j < n; ++j) (*v_out)[j] = v[std::size_t(j) + 1];
  }
  return match;
}

namespace {

/* Bipartite transportation simplex.  Nodes 0..n-1 are rows, n..n+m-1
   columns; the basis is a spanning tree of n+m-1 cells. */
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& C, const Vector& a, const Vector& b)
      : C_(C), a_(a), b_(b), n_(int(a.size())), m_(int(b.size())) {
    pivot_tol_ = 1e-11 * (1.0 + C.cwiseAbs().maxCoeff());
    northwest_corner();
    rebuild_adjacency();
  }

  void run() {
    const long cap = 10000 + 50L * n_ * m_;
    long degenerate_run = 0;
    bool bland = false;
    for (long it = 0; it < cap; ++it) {
      compute_potentials();
      int ei = -1, ej = -1;
      double best = -pivot_tol_;
      for (int i = 0; i < n_ && !(bland && ei >= 0); ++i)
        for (int j = 0; j < m_; ++j) {
          double r = C_(i, j) - u_[std::size_t(i)] - v_[std::size_t(j)];
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
            if (bland) break;  // first negative cell is enough
          }
        }
      if (ei < 0) return;  // dual feasible -> optimal
      double theta = pivot(ei, ej);
      degenerate_run = theta <= 1e-18 ? degenerate_run + 1 : 0;
      if (degenerate_run > 3L * (n_ + m_)) bland = true;  // anti-cycling
    }
    throw convergence_error("transportation simplex exceeded its pivot budget",
                            0.0);
  }

  TransportPlan plan() const {
    TransportPlan out;
    out.matrix = Matrix::Zero(n_, m_);
    for (std::size_t k = 0; k < arc_i_.size(); ++k)
      out.matrix(arc_i_[k], arc_j_[k]) = std::max(arc_flow_[k], 0.0);
    out.row_marginal = out.matrix.rowwise().sum();
    out.col_marginal = out.matrix.colwise().sum().transpose();
    out.cost = 0.0;
    for (std::size_t k = 0; k < arc_i_.size(); ++k)
      out.cost += std::max(arc_flow_[k], 0.0) * C_(arc_i_[k], arc_j_[k]);
    return out;
  }

  void diagnostics(ExactDiagnostics& d) const {
    d.u = Eigen::Map<const Vector>(u_.data(), n_);
    d.v = Eigen::Map<const Vector>(v_.data(), m_);
    double min_red = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j)
        min_red = std::min(
            min_red, C_(i, j) - u_[std::size_t(i)] - v_[std::size_t(j)]);
    d.min_reduced_cost = min_red;
  }

 private:
  void northwest_corner() {
    int i = 0, j = 0;
    double ra = a_[0], cb = b_[0];
    while (true) {
      double f = std::min(ra, cb);
      arc_i_.push_back(i);
      arc_j_.push_back(j);
      arc_flow_.push_back(f);
      ra -= f;
      cb -= f;
      bool last_r = i == n_ - 1, last_c = j == m_ - 1;
      if (last_r && last_c) break;
      if (!last_r && (ra <= 0.0 || last_c)) {
        ++i;
        ra = a_[i];
      } else {
        ++j;
        cb = b_[j];
      }
    }
  }

  void rebuild_adjacency() {
    adj_.assign(std::size_t(n_ + m_), {});
    for (std::size_t k = 0; k < arc_i_.size(); ++k) {
      adj_[std::size_t(arc_i_[k])].push_back(int(k));
      adj_[std::size_t(n_ + arc_j_[k])].push_back(int(k));
    }
  }

  void compute_potentials() {
    u_.assign(std::size_t(n_), 0.0);
    v_.assign(std::size_t(m_), 0.0);
    std::vector<char> seen(std::size_t(n_ + m_), 0);
    std::vector<int> stack = {0};  // root at row 0, u_0 = 0
    seen[0] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      for (int k : adj_[std::size_t(node)]) {
        int i = arc_i_[std::size_t(k)], j = arc_j_[std::size_t(k)];
        int other = node < n_ ? n_ + j : i;
        if (seen[std::size_t(other)]) continue;
        seen[std::size_t(other)] = 1;
        if (other >= n_)
          v_[std::size_t(j)] = C_(i, j) - u_[std::size_t(i)];
        else
          u_[std::size_t(i)] = C_(i, j) - v_[std::size_t(j)];
        stack.push_back(other);
      }
    }
  }

  /* Add cell (ei, ej) to the basis, push theta around the unique cycle,
     and drop the blocking arc.  Returns theta. */
  double pivot(int ei, int ej) {
    /* Tree path from row ei to column node n_+ej. */
    std::vector<int> parent_node(std::size_t(n_ + m_), -1);
    std::vector<int> parent_arc(std::size_t(n_ + m_), -1);
    std::queue<int> q;
    q.push(ei);
    parent_node[std::size_t(ei)] = ei;
    while (!q.empty()) {
      int node = q.front();
      q.pop();
      if (node == n_ + ej) break;
      for (int k : adj_[std::size_t(node)]) {
        int other = node < n_ ? n_ + arc_j_[std::size_t(k)] : arc_i_[std::size_t(k)];
        if (parent_node[std::size_t(other)] >= 0) continue;
        parent_node[std::size_t(other)] = node;
        parent_arc[std::size_t(other)] = k;
        q.push(other);
      }
    }

    /* Arcs along the path, starting at ei, alternate signs -,+,-,... */
    std::vector<int> path_arcs;
    for (int node = n_ + ej; node != ei; node = parent_node[std::size_t(node)])
      path_arcs.push_back(parent_arc[std::size_t(node)]);
    std::reverse(path_arcs.begin(), path_arcs.end());

    double theta = kInf;
    int leave_pos = -1;
    for (std::size_t p = 0; p < path_arcs.size(); ++p)
      if (p % 2 == 0) {  // minus arcs
        double fl = arc_flow_[std::size_t(path_arcs[p])];
        if (fl < theta - 1e-18 ||
            (fl < theta + 1e-18 &&
             (leave_pos < 0 || path_arcs[p] < path_arcs[std::size_t(leave_pos)]))) {
          theta = fl;
          leave_pos = int(p);
        }
      }
    theta = std::max(theta, 0.0);

    for (std::size_t p = 0; p < path_arcs.size(); ++p)
      arc_flow_[std::size_t(path_arcs[p])] += (p % 2 == 0) ? -theta : theta;

    int leaving = path_arcs[std::size_t(leave_pos)];
    arc_i_[std::size_t(leaving)] = ei;
    arc_j_[std::size_t(leaving)] = ej;
    arc_flow_[std::size_t(leaving)] = theta;
    rebuild_adjacency();
    return theta;
  }

  const Matrix& C_;
  Vector a_, b_;
  int n_, m_;
  double pivot_tol_;
  std::vector<int> arc_i_, arc_j_;
  std::vector<double> arc_flow_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> u_, v_;
};

bool is_uniform(const Vector& w) {
  double target = 1.0 / double(w.size());
  for (Index i = 0; i < w.size(); ++i)
    if (std::abs(w[i] - target) > 1e-14) return false;
  return true;
}

void check_marginals_input(const Matrix& cost, const Vector& a, const Vector& b) {
  if (cost.rows() != a.size() || cost.cols() != b.size())
    throw input_error("transport: cost matrix shape does not match marginals");
  for (Index i = 0; i < a.size(); ++i)
    if (!(a[i] > 0.0)) throw input_error("transport: source weights must be positive");
  for (Index j = 0; j < b.size(); ++j)
    if (!(b[j] > 0.0)) throw input_error("transport: target weights must be positive");
  if (std::abs(a.sum() - 1.0) > 1e-9 || std::abs(b.sum() - 1.0) > 1e-9)
    throw input_error("transport: marginals must each sum to 1 (got " +
                      format_double(a.sum()) + " and " + format_double(b.sum()) +
                      ")");
}

}  // namespace

TransportPlan solve_exact(const Matrix& cost, const Vector& a, const Vector& b,
                          ExactDiagnostics* diag) {
  check_marginals_input(cost, a, b);
  const Index n = a.size(), m = b.size();

  TransportPlan plan;
  ExactDiagnostics local;
  if (n == m && is_uniform(a) && is_uniform(b)) {
    double value = 0.0;
    auto match = solve_assignment(cost, &value, &local.u, &local.v);
    plan.matrix = Matrix::Zero(n, m);
    double w = 1.0 / double(n);
    for (Index i = 0; i < n; ++i) plan.matrix(i, match[std::size_t(i)]) = w;
    plan.cost = value * w;
  } else {
    Vector bs = b * (a.sum() / b.sum());  // exact flow conservation
    TransportSimplex simplex(cost, a, bs);
    simplex.run();
    plan = simplex.plan();
    simplex.diagnostics(local);
  }
  plan.row_marginal = plan.matrix.rowwise().sum();
  plan.col_marginal = plan.matrix.colwise().sum().transpose();

  local.duality_gap = plan.cost - (a.dot(local.u) + b.dot(local.v));
  if (std::abs(local.duality_gap) > kGapTol)
    throw convergence_error(
        "exact transport finished with duality gap above 1e-9",
        std::abs(local.duality_gap));
  if (diag) *diag = local;
  return plan;
}

}  // namespace bw
