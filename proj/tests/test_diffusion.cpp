#include "support.hpp"

#include "bikeflow/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace bikeflow;
using namespace testing_support;

TEST_SUITE("diffusion") {

TEST_CASE("init_loads") {
    const auto g = random_instance(5, 2.0, 0.1, 1);
    CHECK(init_loads(SeedSet::make({3}, 100), g).loads == std::vector<double>{0, 0, 0, 100, 0});
    const auto all = init_loads(SeedSet::make({0, 1, 2, 3, 4}, 1), g);
    CHECK(all.loads == std::vector<double>(5, 1.0));
    CHECK(all.total() == 5.0);
    CHECK(init_loads(SeedSet{}, g).loads == std::vector<double>(5, 0.0));
    CHECK_THROWS_AS(init_loads(SeedSet::make({7}, 1), g), ValidationError);
    CHECK_THROWS_AS(SeedSet::make({1, 1}, 1), ValidationError);
    CHECK_THROWS_AS(SeedSet::make({1}, 0), ValidationError);
}

TEST_CASE("step examples") {
    const auto single = graph_of({{0, 0, 1.0}});
    LoadVector x{{42.0}, 0};
    for (int t = 0; t < 5; ++t) x = step(x, single);
    CHECK(x.loads[0] == 42.0);
    CHECK(x.step == 5);

    const auto transfer = graph_of({{0, 1, 1.0}, {1, 1, 1.0}});
    CHECK(step(LoadVector{{7.0, 0.0}, 0}, transfer).loads == std::vector<double>{0.0, 7.0});

    const auto three = graph_of({{0, 1, 0.5}, {0, 2, 0.3}, {0, 0, 0.2}, {1, 1, 1.0}, {2, 2, 1.0}});
    const auto y = step(LoadVector{{10.0, 0.0, 0.0}, 0}, three);
    const auto oracle = mat_vec(naive_matrix(three), {10.0, 0.0, 0.0});
    CHECK(y.loads[0] == doctest::Approx(2.0));
    CHECK(y.loads[1] == doctest::Approx(5.0));
    CHECK(y.loads[2] == doctest::Approx(3.0));
    CHECK(max_abs_diff(y.loads, oracle) <= 1e-12);

    CHECK_THROWS_AS(step(LoadVector{{1.0}, 0}, three), ValidationError);
}

TEST_CASE("propagate examples") {
    const auto g = random_instance(6, 2.0, 0.2, 3);
    const auto seed = SeedSet::make({1, 4}, 5);
    CHECK(propagate(seed, g, 0).loads == init_loads(seed, g).loads);

    const auto path = graph_of({{0, 1, 1.0}, {1, 2, 1.0}, {2, 2, 1.0}});
    CHECK(propagate(SeedSet::make({0}, 1), path, 2).loads == std::vector<double>{0, 0, 1});

    const auto ten = random_instance(10, 3.0, 0.1, 11);
    const auto s = SeedSet::make({2, 5, 9}, 3);
    const auto iterated = propagate(s, ten, 7);
    const auto powered = propagate(s, build_operator(ten, 7));
    CHECK(max_abs_diff(iterated.loads, powered.loads) <= 1e-9);
    CHECK(max_abs_diff(iterated.loads, naive_loads(ten, s.nodes, 3, 7)) <= 1e-9);
    CHECK(iterated.step == 7);
    CHECK_THROWS_AS(propagate(s, ten, -1), ValidationError);
}

TEST_CASE("build_operator examples") {
    const auto g = random_instance(8, 2.5, 0.1, 21);
    const auto id = build_operator(g, 0);
    CHECK(id.matrix.isIdentity(0.0));

    const auto one = build_operator(g, 1);
    const auto p = naive_matrix(g);
    for (std::size_t v = 0; v < 8; ++v)
        for (std::size_t u = 0; u < 8; ++u) CHECK(one.matrix(Eigen::Index(v), Eigen::Index(u)) == p[v][u]);

    const auto five = build_operator(g, 5);
    const auto oracle = naive_power(g, 5);
    double diff = 0;
    for (std::size_t v = 0; v < 8; ++v)
        for (std::size_t u = 0; u < 8; ++u)
            diff = std::max(diff, std::abs(five.matrix(Eigen::Index(v), Eigen::Index(u)) - oracle[v][u]));
    CHECK(diff <= 1e-12);
    for (Eigen::Index u = 0; u < 8; ++u) CHECK(five.matrix.col(u).sum() == doctest::Approx(1.0));
}

TEST_CASE("linearity decomposition") {
    const auto g = random_instance(15, 3.0, 0.1, 8);
    const int tau = 4, L = 7;
    const auto op = build_operator(g, tau);

    const auto single = linearity_decompose(LoadVector{std::vector<double>(15, 0.0), tau}, SeedSet{{}, L},
                                            6, op.column(6));
    CHECK(max_abs_diff(single.loads, propagate(SeedSet::make({6}, L), g, tau).loads) <= 1e-9);

    const auto s = SeedSet::make({1, 9, 12}, L);
    const auto with_u = linearity_decompose(propagate(s, g, tau), s, 4, op.column(4));
    CHECK(max_abs_diff(with_u.loads, propagate(s.with(4), g, tau).loads) <= 1e-9);

    SeedSet acc{{}, L};
    LoadVector loads{std::vector<double>(15, 0.0), tau};
    for (NodeIndex u : {NodeIndex(3), NodeIndex(10), NodeIndex(14)}) {
        loads = linearity_decompose(loads, acc, u, op.column(u));
        acc = acc.with(u);
    }
    CHECK(max_abs_diff(loads.loads, propagate(SeedSet::make({3, 10, 14}, L), g, tau).loads) <= 1e-9);

    CHECK_THROWS_AS(linearity_decompose(propagate(s, g, tau), s, 9, op.column(9)), ValidationError);
}

TEST_CASE("column provider agrees on both paths") {
    const auto g = random_instance(30, 3.0, 0.1, 99);
    const ColumnProvider dense(g, 6, 5000), sparse(g, 6, 10);
    CHECK(dense.dense());
    CHECK_FALSE(sparse.dense());
    std::vector<double> a, b;
    for (NodeIndex u = 0; u < 30; ++u) {
        const auto ca = dense.column(u, a);
        const auto cb = sparse.column(u, b);
        CHECK(max_abs_diff({ca.begin(), ca.end()}, {cb.begin(), cb.end()}) <= 1e-9);
    }
}

TEST_CASE("load conservation and monotonicity") {
    std::mt19937_64 rng(4);
    for (std::uint64_t i = 0; i < 30; ++i) {
        const auto g = random_instance(20, 3.0, 0.05, 100 + i);
        const auto s = SeedSet::make(random_subset(20, 5, rng), 10);
        for (int tau : {0, 1, 5, 30}) CHECK(propagate(s, g, tau).total() == doctest::Approx(50.0).epsilon(1e-9));

        // S subset of T implies loads(S) <= loads(T) entrywise.
        const auto t = s.with([&] {
            for (NodeIndex u = 0;; ++u)
                if (!s.contains(u)) return u;
        }());
        const auto ls = propagate(s, g, 6), lt = propagate(t, g, 6);
        for (std::size_t v = 0; v < 20; ++v) CHECK(ls.loads[v] <= lt.loads[v] + 1e-12);
    }
}

TEST_CASE("loads CSV") {
    const auto g = MobilityGraph::from_edges({2, 5}, {{2, 5, 1.0}, {5, 5, 1.0}}, {{2, {0, 2}}});
    std::ostringstream out;
    write_loads_csv(out, g, LoadVector{{0.25, 1.75}, 1});
    CHECK(out.str() == "node_id,row,col,load\n2,0,2,0.25\n5,,,1.75\n");
}

}
