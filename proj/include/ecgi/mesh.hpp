#pragma once

// Discrete heart geometry and the linear lead-field operator.
//
// The mesh is a regular 3D lattice graph with a graph Laplacian (A - D)/h^2
// used as the diffusion operator. The lead field is an inverse-distance
// gain matrix with every row centered to zero mean, a quasi-static surrogate
// that keeps the smoothing, ill-posed character of a torso operator without
// a boundary-element solver.

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ecgi/common.hpp"
#include "ecgi/container.hpp"

namespace ecgi {

struct HeartMesh {
  Eigen::MatrixXd node_coords;            // n x 3, mm
  std::vector<std::array<int, 2>> edges;  // unique pairs, first < second
  Eigen::MatrixXd laplacian;              // n x n, (A - D)/spacing^2, zero row sums
  double spacing = 1.0;                   // mm
  std::array<int, 3> dims{0, 0, 0};       // lattice dims when built from one

  int node_count() const { return static_cast<int>(node_coords.rows()); }

  std::vector<int> degrees() const {
    std::vector<int> deg(node_count(), 0);
    for (const auto& e : edges) {
      ++deg[e[0]];
      ++deg[e[1]];
    }
    return deg;
  }

  int max_degree() const {
    int m = 0;
    for (int d : degrees()) m = std::max(m, d);
    return m;
  }

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(node_count());
    for (const auto& e : edges) {
      adj[e[0]].push_back(e[1]);
      adj[e[1]].push_back(e[0]);
    }
    return adj;
  }

  bool connected() const {
    const int n = node_count();
    if (n == 0) return false;
    auto adj = adjacency();
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : adj[u])
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          q.push(w);
        }
    }
    return count == n;
  }

  double bounding_box_diagonal() const {
    Eigen::RowVector3d lo = node_coords.colwise().minCoeff();
    Eigen::RowVector3d hi = node_coords.colwise().maxCoeff();
    return (hi - lo).norm();
  }
};

struct LeadField {
  Eigen::MatrixXd H;            // m x n, rows centered to zero mean
  Eigen::MatrixXd lead_coords;  // m x 3, mm (may be empty for loaded fields)
};

// Regular lattice graph with 6-neighborhood. Node index = x + nx*(y + ny*z).
inline HeartMesh build_lattice_mesh(std::array<int, 3> dims, double spacing) {
  require_arg(dims[0] >= 1 && dims[1] >= 1 && dims[2] >= 1, "lattice dims must be positive");
  require_arg(spacing > 0.0, "lattice spacing must be positive");
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  const long n = static_cast<long>(nx) * ny * nz;
  require_arg(n >= 2, "lattice needs at least 2 nodes");

  HeartMesh mesh;
  mesh.spacing = spacing;
  mesh.dims = dims;
  mesh.node_coords.resize(n, 3);
  auto index = [&](int x, int y, int z) { return x + nx * (y + ny * z); };
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x)
        mesh.node_coords.row(index(x, y, z)) << x * spacing, y * spacing, z * spacing;

  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const int i = index(x, y, z);
        if (x + 1 < nx) mesh.edges.push_back({i, index(x + 1, y, z)});
        if (y + 1 < ny) mesh.edges.push_back({i, index(x, y + 1, z)});
        if (z + 1 < nz) mesh.edges.push_back({i, index(x, y, z + 1)});
      }

  const double w = 1.0 / (spacing * spacing);
  mesh.laplacian = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : mesh.edges) {
    mesh.laplacian(e[0], e[1]) += w;
    mesh.laplacian(e[1], e[0]) += w;
    mesh.laplacian(e[0], e[0]) -= w;
    mesh.laplacian(e[1], e[1]) -= w;
  }
  return mesh;
}

// Deterministic Fibonacci-spiral layout on a sphere of radius
// 4 x bounding-box diagonal, centered at the mesh centroid.
inline Eigen::MatrixXd fibonacci_lead_positions(const HeartMesh& mesh, int leads) {
  require_arg(leads >= 1, "lead count must be positive");
  const Eigen::RowVector3d center = mesh.node_coords.colwise().mean();
  const double radius = 4.0 * mesh.bounding_box_diagonal();
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Eigen::MatrixXd pos(leads, 3);
  for (int k = 0; k < leads; ++k) {
    const double y = 1.0 - 2.0 * (k + 0.5) / leads;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double theta = golden * k;
    pos.row(k) = center + radius * Eigen::RowVector3d(r * std::cos(theta), y, r * std::sin(theta));
  }
  return pos;
}

// Raw gains 1/distance, then each row centered to zero mean so that a
// spatially uniform source projects to zero (reference-free potentials).
inline LeadField synthesize_lead_field(const HeartMesh& mesh, const Eigen::MatrixXd& lead_coords,
                                       double min_dist) {
  require_arg(lead_coords.cols() == 3, "lead coordinates must be m x 3");
  require_arg(lead_coords.rows() >= 1, "need at least one lead");
  const int m = static_cast<int>(lead_coords.rows());
  const int n = mesh.node_count();
  LeadField lf;
  lf.lead_coords = lead_coords;
  lf.H.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = (lead_coords.row(i) - mesh.node_coords.row(j)).norm();
      if (d < min_dist)
        throw GeometryError("lead " + std::to_string(i) + " is closer than min_dist to node " +
                            std::to_string(j));
      lf.H(i, j) = 1.0 / d;
    }
    lf.H.row(i).array() -= lf.H.row(i).mean();
  }
  return lf;
}

inline void validate_lead_field(const LeadField& lf, long declared_node_count = -1) {
  if (lf.H.rows() < 1 || lf.H.cols() < 1) throw FormatError("lead field H must be at least 1 x 1");
  if (!lf.H.allFinite()) throw FormatError("lead field H has non-finite entries");
  if (declared_node_count >= 0 && lf.H.cols() != declared_node_count)
    throw FormatError("lead field node count mismatch: H has " + std::to_string(lf.H.cols()) +
                      " columns, declared " + std::to_string(declared_node_count));
  for (Eigen::Index i = 0; i < lf.H.rows(); ++i)
    if (std::abs(lf.H.row(i).mean()) > 1e-10)
      throw FormatError("lead field row " + std::to_string(i) + " is not reference-centered");
  if (lf.lead_coords.size() > 0 &&
      (lf.lead_coords.cols() != 3 || lf.lead_coords.rows() != lf.H.rows()))
    throw FormatError("lead_coords shape inconsistent with H");
}

inline LeadField load_lead_field(const std::filesystem::path& path, long declared_node_count = -1) {
  NamedTensorContainer c = load_container(path);
  if (!c.contains("H")) throw FormatError("container lacks tensor \"H\": " + path.string());
  LeadField lf;
  lf.H = c.at("H").to_matrix();
  if (c.contains("lead_coords")) lf.lead_coords = c.at("lead_coords").to_matrix();
  validate_lead_field(lf, declared_node_count);
  return lf;
}

// Geometry bundle: mesh plus lead field in one container.
inline void save_geometry_bundle(const std::filesystem::path& path, const HeartMesh& mesh,
                                 const LeadField& lf) {
  NamedTensorContainer c;
  c.add_matrix("node_coords", mesh.node_coords);
  Eigen::MatrixXd edges(2, static_cast<Eigen::Index>(mesh.edges.size()));
  for (std::size_t i = 0; i < mesh.edges.size(); ++i) {
    edges(0, static_cast<Eigen::Index>(i)) = mesh.edges[i][0];
    edges(1, static_cast<Eigen::Index>(i)) = mesh.edges[i][1];
  }
  c.add_matrix("edges", edges);
  c.add_matrix("laplacian", mesh.laplacian);
  c.add_matrix("H", lf.H);
  if (lf.lead_coords.size() > 0) c.add_matrix("lead_coords", lf.lead_coords);
  c.metadata["spacing"] = mesh.spacing;
  c.metadata["dims"] = mesh.dims;
  save_container(path, c);
}

inline std::pair<HeartMesh, LeadField> load_geometry_bundle(const std::filesystem::path& path) {
  NamedTensorContainer c = load_container(path);
  HeartMesh mesh;
  mesh.node_coords = c.at("node_coords").to_matrix();
  Eigen::MatrixXd edges = c.at("edges").to_matrix();
  for (Eigen::Index j = 0; j < edges.cols(); ++j)
    mesh.edges.push_back({static_cast<int>(edges(0, j)), static_cast<int>(edges(1, j))});
  mesh.laplacian = c.at("laplacian").to_matrix();
  mesh.spacing = c.metadata.value("spacing", 1.0);
  auto dims = c.metadata.value("dims", std::vector<int>{0, 0, 0});
  if (dims.size() == 3) mesh.dims = {dims[0], dims[1], dims[2]};
  LeadField lf;
  lf.H = c.at("H").to_matrix();
  if (c.contains("lead_coords")) lf.lead_coords = c.at("lead_coords").to_matrix();
  validate_lead_field(lf, mesh.node_count());
  return {std::move(mesh), std::move(lf)};
}

}  // namespace ecgi
