#pragma once

// Two-variable Aliev-Panfilov reaction-diffusion simulator on a mesh graph.
//
//   du/dt = D*Lap(u) - k*u*(u-a)*(u-1) - u*v + stimulus
//   dv/dt = -eps(u,v) * (v + k*u*(u-a-1)),   eps(u,v) = eps0 + mu1*v/(u+mu2)
//
// Explicit Euler with a checked stability bound. Scar nodes are dense,
// non-excitable tissue: incident diffusion edges are removed and u is held
// at the resting value 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ecgi/common.hpp"
#include "ecgi/mesh.hpp"

namespace ecgi {

struct APParams {
  double k = 8.0;
  double a = 0.15;
  double eps0 = 0.002;
  double mu1 = 0.2;
  double mu2 = 0.3;
  double diffusion = 1.0;  // mm^2 per time unit
  double dt = 0.05;
  int n_steps = 2000;
  int record_stride = 25;
};

struct PacingConfig {
  std::vector<int> origin_nodes;
  double stim_start = 0.0;
  // Short suprathreshold kick: enough to clear the excitation threshold a
  // without pushing the recorded plateau past ~1.
  double stim_duration = 0.25;
  double stim_amplitude = 2.0;  // added to du/dt inside the stimulus window
};

struct ScarConfig {
  std::vector<int> scar_nodes;  // may be empty
};

struct TMPSequence {
  Eigen::MatrixXd U;          // n x T, normalized units (rest 0, plateau ~1)
  double dt_effective = 1.0;  // time per recorded column

  int nodes() const { return static_cast<int>(U.rows()); }
  int columns() const { return static_cast<int>(U.cols()); }
  double duration() const { return (U.cols() - 1) * dt_effective; }
};

namespace detail {

inline void validate_ap_inputs(const HeartMesh& mesh, const APParams& p, const PacingConfig& pacing,
                               const ScarConfig& scar) {
  require_arg(p.dt > 0.0, "dt must be positive");
  require_arg(p.n_steps >= 1, "n_steps must be >= 1");
  require_arg(p.diffusion >= 0.0, "diffusion must be >= 0");
  require_arg(p.a > 0.0 && p.a < 1.0, "a must lie in (0,1)");
  require_arg(p.record_stride >= 1, "record_stride must be >= 1");
  require_arg(p.n_steps >= p.record_stride, "n_steps must cover at least one recorded column");
  require_arg(!pacing.origin_nodes.empty(), "pacing needs at least one origin node");
  require_arg(pacing.stim_duration > 0.0 && pacing.stim_amplitude > 0.0,
              "stimulus duration and amplitude must be positive");
  const int n = mesh.node_count();
  for (int i : pacing.origin_nodes) require_arg(i >= 0 && i < n, "origin node out of range");
  for (int i : scar.scar_nodes) require_arg(i >= 0 && i < n, "scar node out of range");

  for (int i : pacing.origin_nodes)
    if (std::find(scar.scar_nodes.begin(), scar.scar_nodes.end(), i) != scar.scar_nodes.end())
      throw ConfigError("pacing origin " + std::to_string(i) + " lies inside the scar region");

  if (p.diffusion > 0.0) {
    const double bound =
        mesh.spacing * mesh.spacing / (2.0 * p.diffusion * std::max(1, mesh.max_degree()));
    if (!(p.dt < bound))
      throw ConfigError("explicit-Euler stability violated: dt=" + std::to_string(p.dt) +
                        " >= " + std::to_string(bound));
  }
}

}  // namespace detail

inline TMPSequence simulate(const HeartMesh& mesh, const APParams& p, const PacingConfig& pacing,
                            const ScarConfig& scar) {
  detail::validate_ap_inputs(mesh, p, pacing, scar);
  const int n = mesh.node_count();

  std::vector<char> is_scar(n, 0);
  for (int i : scar.scar_nodes) is_scar[i] = 1;

  // Diffusion operator over the healthy subgraph; scar-incident edges removed.
  const double w = 1.0 / (mesh.spacing * mesh.spacing);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : mesh.edges) {
    if (is_scar[e[0]] || is_scar[e[1]]) continue;
    lap(e[0], e[1]) += w;
    lap(e[1], e[0]) += w;
    lap(e[0], e[0]) -= w;
    lap(e[1], e[1]) -= w;
  }

  const int t_rec = p.n_steps / p.record_stride;
  TMPSequence out;
  out.dt_effective = p.dt * p.record_stride;
  out.U.resize(n, t_rec);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd du(n), dv(n);
  int col = 0;
  for (int s = 0; s < p.n_steps; ++s) {
    const double t = s * p.dt;
    du = p.diffusion * (lap * u);
    du.array() += -p.k * u.array() * (u.array() - p.a) * (u.array() - 1.0) - u.array() * v.array();
    dv = -(p.eps0 + p.mu1 * v.array() / (u.array() + p.mu2)).matrix().cwiseProduct(
        (v.array() + p.k * u.array() * (u.array() - p.a - 1.0)).matrix());
    if (t >= pacing.stim_start && t < pacing.stim_start + pacing.stim_duration)
      for (int i : pacing.origin_nodes) du(i) += pacing.stim_amplitude;
    u += p.dt * du;
    v += p.dt * dv;
    for (int i : scar.scar_nodes) {
      u(i) = 0.0;
      v(i) = 0.0;
    }
    if ((s + 1) % p.record_stride == 0) out.U.col(col++) = u;
  }
  return out;
}

constexpr double kNeverActivated = std::numeric_limits<double>::infinity();

// Per node, the recorded time of maximum forward temporal difference of u,
// provided the peak exceeds 0.5; +inf marks nodes that never activate.
// The slope criterion (rather than a fixed-threshold crossing) is robust to
// baseline offsets in reconstructed signals.
inline std::vector<double> activation_times(const TMPSequence& tmp) {
  const int n = tmp.nodes(), t_count = tmp.columns();
  std::vector<double> times(n, kNeverActivated);
  for (int i = 0; i < n; ++i) {
    if (tmp.U.row(i).maxCoeff() <= 0.5) continue;
    if (t_count == 1) {
      times[i] = 0.0;
      continue;
    }
    int best = 1;
    double best_diff = -std::numeric_limits<double>::infinity();
    for (int j = 1; j < t_count; ++j) {
      const double d = tmp.U(i, j) - tmp.U(i, j - 1);
      if (d > best_diff) {
        best_diff = d;
        best = j;
      }
    }
    times[i] = best * tmp.dt_effective;
  }
  return times;
}

// Action potential duration: time between the upward and downward crossings
// of u = 0.5, linearly interpolated between recorded columns. Nodes that
// never exceed 0.5 get 0; a missing downward crossing truncates at the end
// of the recording.
inline std::vector<double> apd(const TMPSequence& tmp) {
  const int n = tmp.nodes(), t_count = tmp.columns();
  const double dt = tmp.dt_effective;
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (tmp.U.row(i).maxCoeff() <= 0.5) continue;
    double t_up = -1.0;
    int j_up = 0;
    if (tmp.U(i, 0) > 0.5) {
      t_up = 0.0;
    } else {
      for (int j = 0; j + 1 < t_count; ++j) {
        const double a = tmp.U(i, j), b = tmp.U(i, j + 1);
        if (a <= 0.5 && b > 0.5) {
          t_up = (j + (0.5 - a) / (b - a)) * dt;
          j_up = j + 1;
          break;
        }
      }
    }
    if (t_up < 0.0) continue;  // peak > 0.5 but no upward crossing found
    double t_down = (t_count - 1) * dt;
    for (int j = j_up; j + 1 < t_count; ++j) {
      const double a = tmp.U(i, j), b = tmp.U(i, j + 1);
      if (a > 0.5 && b <= 0.5) {
        t_down = (j + (a - 0.5) / (a - b)) * dt;
        break;
      }
    }
    out[i] = std::max(0.0, t_down - t_up);
  }
  return out;
}

}  // namespace ecgi
