#include <sstream>

#include "doctest.h"
#include "novelty/errors.hpp"
#include "novelty/networks.hpp"
#include "novelty/rng.hpp"

using namespace novelty;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("philox known-answer vectors") {
    using B = Philox::Block;
    using K = Philox::Key;
    CHECK(Philox::generate(B{0, 0, 0, 0}, K{0, 0}) ==
          B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox::generate(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                           K{0xffffffffu, 0xffffffffu}) ==
          B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox::generate(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                           K{0xa4093822u, 0x299f31d0u}) ==
          B{0xd16cfe09u, 0x94fdcceb, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("generator streams are reproducible and distinct") {
    Philox a(42, 7);
    Philox b(42, 7);
    Philox c(42, 8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs = differs || x != c.next_u64();
    }
    CHECK(differs);
    CHECK(Philox::stream_id({1, 2}) != Philox::stream_id({2, 1}));
    CHECK(Philox::stream_id({1, 2}) == Philox::stream_id({1, 2}));
}

TEST_CASE("uniform, below and normal draws") {
    Philox rng(3, 0);
    double sum = 0.0;
    double sum_sq = 0.0;
    const int count = 200000;
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / count == doctest::Approx(0.5).epsilon(0.01));
    std::array<int, 7> bins{};
    for (int i = 0; i < 70000; ++i) {
        const auto k = rng.below(7);
        REQUIRE(k < 7);
        ++bins[k];
    }
    for (const int b : bins) {
        CHECK(std::abs(b - 10000) < 500);
    }
    sum = 0.0;
    for (int i = 0; i < count; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / count) < 0.01);
    CHECK(sum_sq / count == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("single neuron") {
    const auto sys = rate_system(VectorXd::Constant(1, 7.0), MatrixXd::Zero(1, 1));
    CHECK(sys.A(0.0)(0, 0) == doctest::Approx(-1.0 / 7.0));
    CHECK(sys.B(0.0)(0, 0) == doctest::Approx(7.0));

    RateNetConfig cfg;
    cfg.n = 1;
    cfg.n_exc = 1;
    Philox rng(1, 0);
    const auto net = build_rate_network(cfg, rng);
    CHECK(net.W(0, 0) == 0.0);
    CHECK(net.system.A(0.0)(0, 0) == doctest::Approx(-1.0 / net.tau[0]));
}

TEST_CASE("uncoupled network is diagonal and stable") {
    const VectorXd tau{{5.0, 8.0, 10.0}};
    const auto sys = rate_system(tau, MatrixXd::Zero(3, 3));
    const MatrixXd expected = (-tau.cwiseInverse()).asDiagonal();
    CHECK((sys.A(0.0) - expected).norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(rate_system(VectorXd{{1.0, -1.0}}, MatrixXd::Zero(2, 2)), SpecificationError);
    CHECK_THROWS_AS(rate_system(tau, MatrixXd::Zero(2, 2)), ShapeError);
}

TEST_CASE("dense rate network structure and determinism") {
    RateNetConfig cfg;
    Philox rng1(2024, 0);
    Philox rng2(2024, 0);
    const auto a = build_rate_network(cfg, rng1);
    const auto b = build_rate_network(cfg, rng2);
    CHECK(a.system.A(0.0) == b.system.A(0.0));
    CHECK(a.W == b.W);
    CHECK(a.tau.minCoeff() >= 5.0);
    CHECK(a.tau.maxCoeff() <= 10.0);
    CHECK(a.system.B(0.0) == MatrixXd(a.tau.asDiagonal()));
    for (int i = 0; i < cfg.n; ++i) {
        CHECK(a.W(i, i) == 0.0);
        for (int j = 0; j < cfg.n; ++j) {
            if (i == j) {
                continue;
            }
            if (j < cfg.n_exc) {
                REQUIRE(a.W(i, j) > 0.0);
                REQUIRE(a.W(i, j) < 1.0);
            } else {
                REQUIRE(a.W(i, j) < 0.0);
                REQUIRE(a.W(i, j) > -1.0);
            }
        }
    }
    const MatrixXd reconstructed =
        a.tau.cwiseInverse().asDiagonal() * (a.W - MatrixXd::Identity(cfg.n, cfg.n));
    CHECK((a.system.A(0.0) - reconstructed).cwiseAbs().maxCoeff() == 0.0);

    RateNetConfig bad;
    bad.n_exc = 101;
    CHECK_THROWS_AS(bad.validate(), SpecificationError);
}

TEST_CASE("ring lattice without rewiring") {
    GraphEnsembleConfig cfg;
    cfg.family = GraphFamily::WattsStrogatz;
    cfg.n = 4;
    cfg.ring_degree = 2;
    cfg.rewiring = 0.0;
    cfg.require_full_rank = false;
    const MatrixXd adj = sample_adjacency(cfg, 0);
    const MatrixXd cycle{{0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}};
    CHECK(adj == cycle);
    // The 4-cycle is singular, so full-rank sampling cannot succeed.
    cfg.require_full_rank = true;
    cfg.max_resamples = 3;
    CHECK_THROWS_AS(sample_adjacency(cfg, 0), GenerationError);
}

TEST_CASE("preferential attachment with one edge per node") {
    GraphEnsembleConfig cfg;
    cfg.family = GraphFamily::BarabasiAlbert;
    cfg.n = 3;
    cfg.attachment = 1;
    cfg.require_full_rank = false;
    for (int index = 0; index < 10; ++index) {
        const MatrixXd adj = sample_adjacency(cfg, index);
        CHECK(edge_count(adj) == 2);
        CHECK(is_connected(adj));
    }
}

TEST_CASE("edge counts are fixed across realizations") {
    for (const auto seed : {BaSeedGraph::Star, BaSeedGraph::Clique}) {
        GraphEnsembleConfig ba;
        ba.n = 100;
        ba.attachment = 4;
        ba.ba_seed = seed;
        ba.seed = 5;
        const int expected = seed == BaSeedGraph::Star ? 4 * 96 : 400;
        for (int index = 0; index < 100; ++index) {
            const MatrixXd adj = sample_adjacency(ba, index);
            REQUIRE(edge_count(adj) == expected);
            REQUIRE(adj == adj.transpose());
            REQUIRE(adj.diagonal().isZero());
            REQUIRE(is_connected(adj));
            REQUIRE(is_full_rank(adj));
        }
    }
    GraphEnsembleConfig ws;
    ws.family = GraphFamily::WattsStrogatz;
    ws.n = 100;
    ws.ring_degree = 8;
    ws.seed = 5;
    for (int index = 0; index < 100; ++index) {
        const MatrixXd adj = sample_adjacency(ws, index);
        REQUIRE(edge_count(adj) == 400);
        REQUIRE(adj == adj.transpose());
        REQUIRE(is_connected(adj));
        REQUIRE(is_full_rank(adj));
    }
}

TEST_CASE("realizations are reproducible by index") {
    GraphEnsembleConfig cfg;
    cfg.seed = 11;
    CHECK(sample_adjacency(cfg, 3) == sample_adjacency(cfg, 3));
    CHECK(sample_adjacency(cfg, 3) != sample_adjacency(cfg, 4));
    auto other = cfg;
    other.seed = 12;
    CHECK(sample_adjacency(cfg, 3) != sample_adjacency(other, 3));
}

TEST_CASE("scale-free hubs exceed small-world degrees at matched edge counts") {
    int wins = 0;
    const int pairs = 100;
    for (int index = 0; index < pairs; ++index) {
        GraphEnsembleConfig ba;
        ba.attachment = 4;
        ba.ba_seed = BaSeedGraph::Clique;
        ba.seed = 99;
        GraphEnsembleConfig ws;
        ws.family = GraphFamily::WattsStrogatz;
        ws.ring_degree = 8;
        ws.seed = 99;
        const MatrixXd a = sample_adjacency(ba, index);
        const MatrixXd b = sample_adjacency(ws, index);
        REQUIRE(edge_count(a) == edge_count(b));
        wins += max_degree(a) > max_degree(b) ? 1 : 0;
    }
    CHECK(wins >= 95);
}

TEST_CASE("edge weights") {
    Philox rng(8, 1);
    CHECK(weight_adjacency(MatrixXd::Zero(5, 5), rng).isZero());

    GraphEnsembleConfig cfg;
    cfg.n = 30;
    cfg.attachment = 2;
    const MatrixXd adj = sample_adjacency(cfg, 0);
    Philox r1(8, 2);
    Philox r2(8, 2);
    const MatrixXd W = weight_adjacency(adj, r1);
    CHECK(W == weight_adjacency(adj, r2));
    for (int i = 0; i < adj.rows(); ++i) {
        for (int j = 0; j < adj.cols(); ++j) {
            if (adj(i, j) != 0.0) {
                REQUIRE(W(i, j) > 0.0);
                REQUIRE(W(i, j) < 1.0);
            } else {
                REQUIRE(W(i, j) == 0.0);
            }
        }
    }
    CHECK(W != W.transpose());
    Philox r3(8, 3);
    const MatrixXd S = weight_adjacency(adj, r3, 0.0, 1.0, true);
    CHECK(S == S.transpose());
}

TEST_CASE("edge density") {
    CHECK(edge_density(MatrixXd::Ones(6, 6) - MatrixXd::Identity(6, 6)) == doctest::Approx(1.0));
    CHECK(edge_density(MatrixXd::Zero(6, 6)) == 0.0);
    MatrixXd adj = MatrixXd::Zero(100, 100);
    int placed = 0;
    for (int i = 0; i < 100 && placed < 200; ++i) {
        for (int j = i + 1; j < 100 && placed < 200; ++j) {
            adj(i, j) = adj(j, i) = 1.0;
            ++placed;
        }
    }
    CHECK(edge_density(adj) == doctest::Approx(200.0 / 4950.0));
    CHECK(edge_density(adj) == doctest::Approx(0.040404).epsilon(1e-5));
}

TEST_CASE("edge list round trip and parsing errors") {
    GraphEnsembleConfig cfg;
    cfg.n = 20;
    cfg.attachment = 2;
    const MatrixXd adj = sample_adjacency(cfg, 1);
    std::stringstream buffer;
    write_edge_list(buffer, adj);
    CHECK(read_edge_list(buffer) == adj);

    std::istringstream isolated("0 1\n");
    CHECK(read_edge_list(isolated, 4).rows() == 4);
    std::istringstream bad("0 1\n2 x\n");
    CHECK_THROWS_AS(read_edge_list(bad), UsageError);
    std::istringstream loop("1 1\n");
    CHECK_THROWS_AS(read_edge_list(loop), UsageError);
    std::istringstream too_big("# n=3\n0 5\n");
    CHECK_THROWS_AS(read_edge_list(too_big), UsageError);
    CHECK_THROWS_AS(graph_family_from_string("ER"), UsageError);
    CHECK(graph_family_from_string("WS") == GraphFamily::WattsStrogatz);
}
