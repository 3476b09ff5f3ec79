#include "hpgcn/graph.hpp"
#include "hpgcn/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace hpgcn;

namespace {

SparseAdjacency make(Index n, std::vector<Edge> edges) {
  return build_adjacency(n, edges);
}

// Independent reachability oracle: transitive closure over a dense boolean
// matrix, no shared code with the CSR path.
std::vector<Index> brute_force_components(Index n,
                                          const std::vector<Edge>& edges) {
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (Index i = 0; i < n; ++i) reach[i][i] = true;
  for (const Edge& e : edges) {
    if (e.u == e.v) continue;
    reach[e.u][e.v] = true;
    reach[e.v][e.u] = true;
  }
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::vector<Index> id(n, -1);
  Index next = 0;
  for (Index i = 0; i < n; ++i) {
    if (id[i] >= 0) continue;
    for (Index j = 0; j < n; ++j)
      if (reach[i][j]) id[j] = next;
    ++next;
  }
  return id;
}

std::vector<Edge> random_edges(Index n, Scalar p, Rng& rng) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({i, j, 1.0});
  return edges;
}

}  // namespace

TEST_CASE("build_adjacency symmetrizes a single edge") {
  const auto adj = make(3, {{0, 1}});
  CHECK(adj.nnz() == 2);
  CHECK(adj.weight(0, 1) == 1.0);
  CHECK(adj.weight(1, 0) == 1.0);
  CHECK(adj.neighbors(2).empty());
}

TEST_CASE("build_adjacency strips self-loops") {
  const auto adj = make(2, {{0, 0}});
  CHECK(adj.nnz() == 0);
}

TEST_CASE("build_adjacency merges duplicates by weight sum") {
  const auto adj = make(3, {{0, 1}, {1, 0}, {0, 1}});
  CHECK(adj.weight(0, 1) == 3.0);
  CHECK(adj.weight(1, 0) == 3.0);
  CHECK(adj.nnz() == 2);
}

TEST_CASE("build_adjacency rejects bad input") {
  CHECK_THROWS_AS(make(2, {{0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(make(2, {{-1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(make(2, {{0, 1, -0.5}}), std::invalid_argument);
}

TEST_CASE("degrees of a single edge") {
  const auto deg = degrees(make(2, {{0, 1}}));
  CHECK(deg.d[0] == 1.0);
  CHECK(deg.d[1] == 1.0);
  CHECK(deg.d_inv_sqrt[0] == 1.0);
}

TEST_CASE("degrees of an isolated node are zero") {
  const auto deg = degrees(make(1, {}));
  CHECK(deg.d[0] == 0.0);
  CHECK(deg.d_inv_sqrt[0] == 0.0);
}

TEST_CASE("degrees of a star center") {
  const auto deg = degrees(make(4, {{0, 1}, {0, 2}, {0, 3}}));
  CHECK(deg.d[0] == 3.0);
  CHECK(deg.d_inv_sqrt[0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("laplacian_matvec on K2") {
  const auto adj = make(2, {{0, 1}});
  const auto deg = degrees(adj);
  Vector ones(2);
  ones << 1, 1;
  const Vector zero = laplacian_matvec(adj, deg, ones);
  CHECK(zero[0] == doctest::Approx(0.0));
  CHECK(zero[1] == doctest::Approx(0.0));

  Vector alt(2);
  alt << 1, -1;
  const Vector out = laplacian_matvec(adj, deg, alt);
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(-2.0));
}

TEST_CASE("laplacian_matvec is the identity on isolated nodes") {
  const auto adj = make(1, {});
  Vector x(1);
  x << 5;
  CHECK(laplacian_matvec(adj, degrees(adj), x)[0] == 5.0);
}

TEST_CASE("all-ones vector is in the kernel on regular components") {
  // 4-cycle: 2-regular, so D^{-1/2} W D^{-1/2} row-sums are 1
  const auto adj = make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const Vector out = laplacian_matvec(adj, degrees(adj), Vector::Ones(4));
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(out[i]) < 1e-15);
}

TEST_CASE("laplacian_matvec rejects length mismatch") {
  const auto adj = make(2, {{0, 1}});
  CHECK_THROWS_AS(laplacian_matvec(adj, degrees(adj), Vector::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("laplacian kernel and symmetry properties") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + rng.uniform_index(40);
    const auto edges = random_edges(n, 0.15, rng);
    const auto adj = build_adjacency(n, edges);
    const auto deg = degrees(adj);

    // the kernel vector of the symmetric normalization is sqrt(d); the
    // all-ones vector is in the kernel only on regular components
    const Vector sqrt_d = deg.d.cwiseSqrt();
    const Vector lk = laplacian_matvec(adj, deg, sqrt_d);
    for (Index i = 0; i < n; ++i) CHECK(std::abs(lk[i]) < 1e-12);
    const Vector lones = laplacian_matvec(adj, deg, Vector::Ones(n));
    for (Index i = 0; i < n; ++i) {
      if (deg.d[i] == 0.0) CHECK(lones[i] == 1.0);
    }

    Vector x(n), y(n);
    for (Index i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
    }
    const Scalar lhs = laplacian_matvec(adj, deg, x).dot(y);
    const Scalar rhs = x.dot(laplacian_matvec(adj, deg, y));
    CHECK(std::abs(lhs - rhs) <=
          1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
  }
}

TEST_CASE("union_relations") {
  AttributedGraph g;
  g.features = Matrix::Zero(3, 1);
  g.labels = {0, 0, 0};

  SUBCASE("one relation is the identity") {
    g.relations.emplace_back("a", make(3, {{0, 1}}));
    const auto u = union_relations(g);
    CHECK(u.nnz() == 2);
    CHECK(u.weight(0, 1) == 1.0);
  }
  SUBCASE("disjoint relations union") {
    g.relations.emplace_back("a", make(3, {{0, 1}}));
    g.relations.emplace_back("b", make(3, {{1, 2}}));
    const auto u = union_relations(g);
    CHECK(u.weight(0, 1) == 1.0);
    CHECK(u.weight(1, 2) == 1.0);
    CHECK(u.nnz() == 4);
  }
  SUBCASE("idempotent with presence weights") {
    g.relations.emplace_back("a", make(3, {{0, 1, 2.0}}));
    g.relations.emplace_back("b", make(3, {{0, 1, 7.0}}));
    const auto u = union_relations(g);
    CHECK(u.nnz() == 2);
    CHECK(u.weight(0, 1) == 1.0);
  }
}

TEST_CASE("union_relations is order-insensitive") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 3 + rng.uniform_index(20);
    const auto e1 = random_edges(n, 0.2, rng);
    const auto e2 = random_edges(n, 0.2, rng);
    AttributedGraph g1, g2;
    g1.features = g2.features = Matrix::Zero(n, 1);
    g1.labels = g2.labels = std::vector<int>(n, 0);
    g1.relations.emplace_back("a", build_adjacency(n, e1));
    g1.relations.emplace_back("b", build_adjacency(n, e2));
    g2.relations.emplace_back("b", build_adjacency(n, e2));
    g2.relations.emplace_back("a", build_adjacency(n, e1));
    const auto u1 = union_relations(g1);
    const auto u2 = union_relations(g2);
    CHECK(u1.col_indices() == u2.col_indices());
    CHECK(u1.row_offsets() == u2.row_offsets());
  }
}

TEST_CASE("connected_components basics") {
  SUBCASE("dyad plus isolate") {
    const auto c = connected_components(make(3, {{0, 1}}));
    CHECK(c.component_id == std::vector<Index>{0, 0, 1});
    CHECK(c.component_sizes == std::vector<Index>{2, 1});
  }
  SUBCASE("all isolated") {
    const auto c = connected_components(make(4, {}));
    CHECK(c.num_components() == 4);
    for (const Index s : c.component_sizes) CHECK(s == 1);
  }
  SUBCASE("path is one component") {
    const auto c = connected_components(make(4, {{0, 1}, {1, 2}, {2, 3}}));
    CHECK(c.num_components() == 1);
    CHECK(c.component_sizes[0] == 4);
  }
}

TEST_CASE("connected_components agrees with the reachability oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 1 + rng.uniform_index(64);
    const auto edges = random_edges(n, rng.uniform(0.0, 0.12), rng);
    const auto got = connected_components(build_adjacency(n, edges));
    const auto want = brute_force_components(n, edges);
    // same partition up to id names; ids must also be first-seen ordered,
    // which the oracle's scan order reproduces exactly
    CHECK(got.component_id == want);
    Index total = 0;
    for (const Index s : got.component_sizes) total += s;
    CHECK(total == n);
  }
}

TEST_CASE("partition_nodes thresholds") {
  const auto c = connected_components(make(3, {{0, 1}}));
  SUBCASE("min 1 keeps the dyad") {
    const auto p = partition_nodes(c, 1);
    CHECK(p.isolated_nodes == std::vector<Index>{2});
    CHECK(p.connected_nodes == std::vector<Index>{0, 1});
  }
  SUBCASE("min 2 swallows the dyad") {
    const auto p = partition_nodes(c, 2);
    CHECK(p.isolated_nodes == std::vector<Index>{0, 1, 2});
    CHECK(p.connected_nodes.empty());
  }
  SUBCASE("min 0 rejected") {
    CHECK_THROWS_AS(partition_nodes(c, 0), std::invalid_argument);
  }
}

TEST_CASE("partition with min 1 is exactly the degree-0 set") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + rng.uniform_index(50);
    const auto adj = build_adjacency(n, random_edges(n, 0.05, rng));
    const auto deg = degrees(adj);
    const auto p = partition_nodes(connected_components(adj), 1);
    std::vector<Index> zero_degree;
    for (Index i = 0; i < n; ++i)
      if (deg.d[i] == 0.0) zero_degree.push_back(i);
    CHECK(p.isolated_nodes == zero_degree);
  }
}

TEST_CASE("induced_subgraph") {
  SUBCASE("path prefix") {
    const auto sub =
        induced_subgraph(make(3, {{0, 1}, {1, 2}}), std::vector<Index>{0, 1});
    CHECK(sub.adj.n_nodes() == 2);
    CHECK(sub.adj.weight(0, 1) == 1.0);
    CHECK(sub.adj.nnz() == 2);
  }
  SUBCASE("single node has no edges") {
    const auto sub =
        induced_subgraph(make(3, {{0, 1}, {1, 2}}), std::vector<Index>{2});
    CHECK(sub.adj.nnz() == 0);
    CHECK(sub.global_nodes == std::vector<Index>{2});
  }
  SUBCASE("cycle minus a node is a path") {
    const auto sub = induced_subgraph(
        make(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}), std::vector<Index>{0, 1, 2});
    CHECK(sub.adj.n_edges() == 2);
    CHECK(sub.adj.weight(0, 1) == 1.0);
    CHECK(sub.adj.weight(1, 2) == 1.0);
    CHECK(sub.adj.weight(0, 2) == 0.0);
  }
  SUBCASE("rejects unsorted or duplicate nodes") {
    const auto adj = make(3, {{0, 1}});
    CHECK_THROWS_AS(induced_subgraph(adj, std::vector<Index>{1, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(induced_subgraph(adj, std::vector<Index>{1, 1}),
                    std::invalid_argument);
  }
}
