#include "hpgcn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hpgcn {

EigenBasis dense_eigendecompose(const SparseAdjacency& adj, Index max_nodes) {
  const Index n = adj.n_nodes();
  if (n > max_nodes)
    throw std::invalid_argument("graph exceeds the dense eigensolver cap");

  const DegreeVector deg = degrees(adj);
  const ComponentLabeling comps = connected_components(adj);

  // L is block-diagonal over components, so each block is solved densely on
  // its own and the pairs are merged afterwards. Singleton components are the
  // exact pairs (1, e_i) under the zero-degree convention.
  std::vector<std::vector<Index>> members(comps.num_components());
  for (Index i = 0; i < n; ++i) members[comps.component_id[i]].push_back(i);

  Vector lambdas(n);
  Matrix u = Matrix::Zero(n, n);
  Index written = 0;
  for (const auto& nodes : members) {
    const Index m = static_cast<Index>(nodes.size());
    if (m == 1) {
      lambdas[written] = 1.0;
      u(nodes[0], written) = 1.0;
      ++written;
      continue;
    }
    Matrix block = Matrix::Identity(m, m);
    for (Index li = 0; li < m; ++li) {
      const Index gi = nodes[li];
      const auto ns = adj.neighbors(gi);
      const auto ws = adj.weights(gi);
      for (size_t k = 0; k < ns.size(); ++k) {
        // neighbors stay inside the component
        const Index lj = static_cast<Index>(
            std::lower_bound(nodes.begin(), nodes.end(), ns[k]) -
            nodes.begin());
        block(li, lj) -=
            deg.d_inv_sqrt[gi] * ws[k] * deg.d_inv_sqrt[ns[k]];
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(block);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition failed to converge");
    for (Index k = 0; k < m; ++k) {
      lambdas[written] = solver.eigenvalues()[k];
      for (Index li = 0; li < m; ++li)
        u(nodes[li], written) = solver.eigenvectors()(li, k);
      ++written;
    }
  }

  // Merge blocks into one ascending spectrum; stable so equal eigenvalues
  // keep component order.
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return lambdas[a] < lambdas[b]; });

  EigenBasis basis;
  basis.lambdas.resize(n);
  basis.u.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    basis.lambdas[k] = lambdas[order[k]];
    Vector col = u.col(order[k]);
    Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0.0) col = -col;
    basis.u.col(k) = col;
  }
  return basis;
}

Vector gft(const EigenBasis& basis, const Vector& x) {
  if (x.size() != basis.n())
    throw std::invalid_argument("signal length mismatch");
  return basis.u.transpose() * x;
}

Vector igft(const EigenBasis& basis, const Vector& xhat) {
  if (xhat.size() != basis.n())
    throw std::invalid_argument("spectrum length mismatch");
  return basis.u * xhat;
}

FilterCoefficients FilterCoefficients::monomial(Index k, Index size) {
  if (k < 0 || k >= size)
    throw std::invalid_argument("monomial index out of range");
  Vector t = Vector::Zero(size);
  t[k] = 1.0;
  return FilterCoefficients(std::move(t));
}

Vector frequency_response(const FilterCoefficients& coeffs,
                          const Vector& lambda_grid) {
  Vector h = Vector::Zero(lambda_grid.size());
  for (Index i = 0; i < lambda_grid.size(); ++i) {
    Scalar pow = 1.0;
    for (Index k = 0; k < coeffs.order(); ++k) {
      h[i] += coeffs.theta[k] * pow;
      pow *= lambda_grid[i];
    }
  }
  return h;
}

Vector apply_spectral_filter(const EigenBasis& basis,
                             const FilterCoefficients& coeffs,
                             const Vector& x) {
  const Vector gains = frequency_response(coeffs, basis.lambdas);
  return igft(basis, gains.cwiseProduct(gft(basis, x)));
}

Vector apply_spatial_filter(const SparseAdjacency& adj,
                            const DegreeVector& deg,
                            const FilterCoefficients& coeffs,
                            const Vector& x) {
  if (x.size() != adj.n_nodes())
    throw std::invalid_argument("signal length mismatch");
  Vector power = x;
  Vector y = coeffs.theta[0] * x;
  for (Index k = 1; k < coeffs.order(); ++k) {
    power = laplacian_matvec(adj, deg, power);
    y += coeffs.theta[k] * power;
  }
  return y;
}

Vector gaussian_bandpass_response(const Vector& lambda_grid, Scalar center,
                                  Scalar width) {
  if (!(width > 0.0)) throw std::invalid_argument("band width must be > 0");
  Vector h(lambda_grid.size());
  for (Index i = 0; i < lambda_grid.size(); ++i) {
    const Scalar d = lambda_grid[i] - center;
    h[i] = std::exp(-d * d / (2.0 * width * width));
  }
  return h;
}

Scalar SpectrumReport::energy_above(Scalar c) const {
  Scalar total = 0.0;
  Scalar above = 0.0;
  for (Index i = 0; i < lambdas.size(); ++i) {
    const Scalar e = magnitudes[i] * magnitudes[i];
    total += e;
    if (lambdas[i] > c) above += e;
  }
  if (total <= 0.0) return 0.0;
  return above / total;
}

SpectrumReport spectral_energy_profile(const EigenBasis& basis,
                                       const Vector& x, Scalar cutoff) {
  if (cutoff < 0.0 || cutoff > 2.0)
    throw std::invalid_argument("cutoff must lie in [0, 2]");
  SpectrumReport report;
  report.lambdas = basis.lambdas;
  report.magnitudes = gft(basis, x).cwiseAbs();
  report.cutoff = cutoff;
  report.zero_signal = x.isZero(0.0);
  report.energy_above_cutoff = report.energy_above(cutoff);
  return report;
}

}  // namespace hpgcn
