#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sgval/attribute_graph.hpp"
#include "sgval/noise_detector.hpp"
#include "sgval/parallel.hpp"
#include "sgval/relabeler.hpp"
#include "support.hpp"

using namespace sgval;
using namespace sgval::testing;

namespace {

// A single attribute whose scores against the identity embeddings are the
// given values (up to the positive normalization of W).
Matrix attributes_with_scores(std::vector<double> scores) {
    const std::size_t c = scores.size();
    return Matrix(1, c, std::move(scores));
}

EmbeddingMatrix identity_embeddings(std::size_t c) {
    Matrix m(c, c);
    for (std::size_t i = 0; i < c; ++i) m(i, i) = 1.0;
    return EmbeddingMatrix::from_raw(std::move(m));
}

// Random graph, sometimes with integer coordinates and duplicated nodes so
// that exact ties occur.
AttributeGraph random_graph(Engine& rng, std::size_t n, std::size_t m, std::size_t z) {
    Matrix nodes(n * m, z);
    const bool integral = pick(rng, 0, 1) == 1;
    for (double& v : nodes.values()) v = integral ? double(pick(rng, 0, 3)) : uniform(rng);
    if (n * m > 2 && pick(rng, 0, 1) == 1) {
        const std::size_t a = pick(rng, 0, n * m - 1), b = pick(rng, 0, n * m - 1);
        std::copy(nodes.row(a).begin(), nodes.row(a).end(), nodes.row(b).begin());
    }
    return AttributeGraph(std::move(nodes), m);
}

}  // namespace

TEST_CASE("rank_by_score") {
    CHECK(rank_by_score(std::vector<double>{0.1, 0.9, 0.5}) == std::vector<std::size_t>{1, 2, 0});
    CHECK(rank_by_score(std::vector<double>{2, 2, 2, 2}) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(rank_by_score(std::vector<double>{1, 3, 3, 0}) == std::vector<std::size_t>{1, 2, 0, 3});
}

TEST_CASE("rank_labels matches brute-force scores") {
    Engine rng(21);
    for (int t = 0; t < 30; ++t) {
        const auto w = random_embeddings(rng, pick(rng, 2, 10), pick(rng, 2, 6));
        const Matrix v = random_matrix(rng, pick(rng, 1, 3), w.dim());
        const auto s = oracle_scores(v, w.rows());
        const auto r = rank_labels(v, w);
        for (std::size_t i = 1; i < r.size(); ++i) {
            CHECK((s[r[i - 1]] > s[r[i]] || (s[r[i - 1]] == s[r[i]] && r[i - 1] < r[i])));
        }
    }
}

TEST_CASE("is_clean") {
    const auto w = identity_embeddings(3);
    CHECK(is_clean(attributes_with_scores({0.9, 0.1, 0.2}), w, std::vector<double>{1, 0, 0}));
    CHECK_FALSE(is_clean(attributes_with_scores({0.1, 0.9, 0.2}), w, std::vector<double>{1, 0, 0}));
    CHECK(is_clean(attributes_with_scores({0.8, 0.7, 0.1}), w, std::vector<double>{1, 1, 0}));
    CHECK(is_clean(attributes_with_scores({0.1, 0.7, 0.8}), w, std::vector<double>{1, 1, 1}));
    CHECK(is_clean(attributes_with_scores({0.1, 0.7, 0.8}), w, std::vector<double>{0, 0, 0}));
}

TEST_CASE("is_clean is invariant to positive rescaling of attributes") {
    Engine rng(22);
    for (int t = 0; t < 50; ++t) {
        const auto w = random_embeddings(rng, 6, 4);
        Matrix v = random_matrix(rng, 2, 4);
        const auto y = random_binary(rng, 6);
        const bool before = is_clean(v, w, y);
        for (double& x : v.values()) x *= 4.0;  // power of two keeps products exact
        CHECK(is_clean(v, w, y) == before);
    }
}

TEST_CASE("split_clean_noisy partitions the samples") {
    Engine rng(23);
    const auto w = random_embeddings(rng, 5, 4);
    const Dataset data = validate_dataset(random_matrix(rng, 40, 3), random_labels(rng, 40, 5), w);
    const auto p = random_projector(rng, 2, 3, 4);
    const auto split = split_clean_noisy(data, p, w);
    std::vector<std::size_t> all = split.clean_indices;
    all.insert(all.end(), split.noisy_indices.begin(), split.noisy_indices.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 40; ++i) CHECK(all[i] == i);
    CHECK(std::is_sorted(split.clean_indices.begin(), split.clean_indices.end()));
    for (std::size_t i : split.clean_indices) {
        CHECK(is_clean(naive_projection(p, data.features.row(i)), w, data.labels.row(i)));
    }
    for (std::size_t i : split.noisy_indices) {
        CHECK_FALSE(is_clean(naive_projection(p, data.features.row(i)), w, data.labels.row(i)));
    }
}

TEST_CASE("split with oracle scores and a single noisy sample") {
    const auto w = identity_embeddings(3);
    // identity head: the feature is its own attribute, so labels drawn from
    // the top-ranked classes are clean
    AttributeProjector p(1, 3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0});
    const Dataset clean = validate_dataset(Matrix(2, 3, {0.9, 0.2, 0.1, 0.1, 0.8, 0.7}),
                                           LabelMatrix(Matrix(2, 3, {1, 0, 0, 0, 1, 1}), LabelKind::binary), w);
    CHECK(split_clean_noisy(clean, p, w).noisy_indices.empty());
    const Dataset one = validate_dataset(Matrix(1, 3, {0.1, 0.9, 0.2}),
                                         LabelMatrix(Matrix(1, 3, {1, 0, 0}), LabelKind::binary), w);
    const auto split = split_clean_noisy(one, p, w);
    CHECK(split.clean_indices.empty());
    CHECK(split.noisy_indices == std::vector<std::size_t>{0});
}

TEST_CASE("build_graph layout") {
    Engine rng(24);
    const auto w = random_embeddings(rng, 3, 4);
    const Dataset data = validate_dataset(random_matrix(rng, 2, 5), random_labels(rng, 2, 3), w);
    const auto p = random_projector(rng, 3, 5, 4);
    const AttributeGraph g = build_graph(data, p);
    CHECK(g.node_count() == 6);
    for (std::size_t n = 0; n < 6; ++n) CHECK(g.owner(n) == n / 3);
    for (std::size_t i = 0; i < 2; ++i) {
        const Matrix v = naive_projection(p, data.features.row(i));
        for (std::size_t m = 0; m < 3; ++m) {
            const auto row = g.node(i * 3 + m);
            CHECK(std::equal(row.begin(), row.end(), v.row(m).begin()));
        }
    }
    AttributeProjector zero(2, 5, 4);
    zero.bias(1)[2] = 3.0;
    const AttributeGraph gz = build_graph(data, zero);
    for (std::size_t n = 0; n < gz.node_count(); ++n) {
        const auto row = gz.node(n);
        CHECK(std::equal(row.begin(), row.end(), zero.bias(n % 2).begin()));
    }
}

TEST_CASE("graph validation") {
    CHECK_THROWS_AS(AttributeGraph(Matrix(5, 2), 2), DataError);
    Matrix bad(4, 2);
    bad(1, 1) = INFINITY;
    CHECK_THROWS_AS(AttributeGraph(bad, 2), DataError);
}

TEST_CASE("edge weight") {
    CHECK(edge_weight(std::vector<double>{0, 0}, std::vector<double>{0, 2}) == 0.5);
    CHECK(edge_weight(std::vector<double>{1, 1}, std::vector<double>{1, 1}) == 1e12);
    Engine rng(25);
    for (int t = 0; t < 20; ++t) {
        const Matrix ab = random_matrix(rng, 2, 7);
        double sq = 0.0;
        for (std::size_t k = 0; k < 7; ++k) sq += (ab(0, k) - ab(1, k)) * (ab(0, k) - ab(1, k));
        CHECK(edge_weight(ab.row(0), ab.row(1)) == doctest::Approx(1.0 / std::sqrt(sq)).epsilon(1e-14));
    }
}

TEST_CASE("knn on tiny graphs") {
    Engine rng(26);
    const AttributeGraph two(random_matrix(rng, 6, 4), 3);
    for (std::size_t k = 1; k <= 3; ++k) {
        CHECK(knn_images(two, 0, k) == std::vector<std::size_t>{1});
        CHECK(knn_images(two, 1, k) == std::vector<std::size_t>{0});
    }
    const AttributeGraph five(random_matrix(rng, 10, 3), 2);
    CHECK(knn_images(five, 2, 8) == std::vector<std::size_t>{0, 1, 3, 4});
    CHECK_THROWS_AS(knn_images(five, 2, 0), ConfigError);
    CHECK_THROWS_AS(knn_images(five, 2, 9), ConfigError);
    CHECK_THROWS_AS(knn_images(five, 5, 1), ConfigError);
    CHECK_THROWS_AS(knn_images(AttributeGraph(Matrix(2, 3), 2), 0, 1), ConfigError);
}

TEST_CASE("knn matches the exhaustive oracle, including ties") {
    Engine rng(27);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = pick(rng, 2, 30), m = pick(rng, 1, 3), z = pick(rng, 1, 6);
        const AttributeGraph g = random_graph(rng, n, m, z);
        const std::size_t k = pick(rng, 1, (n - 1) * m);
        const auto all = batch_knn(g, k);
        for (std::size_t q = 0; q < n; ++q) {
            const auto expected = brute_knn(g.nodes(), m, q, k);
            CHECK(knn_images(g, q, k) == expected);
            CHECK(all[q] == expected);
        }
    }
}

TEST_CASE("knn on a large tiled graph matches the oracle") {
    // more nodes than one tile, so the single-precision prefilter is exercised
    Engine rng(28);
    const std::size_t n = 400, m = 2, z = 16;
    const AttributeGraph g(random_matrix(rng, n * m, z), m);
    const auto all = batch_knn(g, 20);
    for (std::size_t q = 0; q < n; q += 37) CHECK(all[q] == brute_knn(g.nodes(), m, q, 20));
}

TEST_CASE("knn properties") {
    Engine rng(29);
    const std::size_t n = 25, m = 3;
    Matrix nodes = random_matrix(rng, n * m, 5);
    const AttributeGraph g(nodes, m);
    for (std::size_t q = 0; q < n; ++q) {
        std::vector<std::size_t> previous;
        for (std::size_t k = 1; k <= 20; ++k) {
            const auto set = knn_images(g, q, k);
            CHECK(set.size() <= k);
            CHECK(set.size() >= 1);
            CHECK(std::find(set.begin(), set.end(), q) == set.end());
            CHECK(std::includes(set.begin(), set.end(), previous.begin(), previous.end()));
            previous = set;
        }
    }
    for (double& v : nodes.values()) v *= 8.0;
    const AttributeGraph scaled(nodes, m);
    CHECK(batch_knn(scaled, 7) == batch_knn(g, 7));
    // K counts graph nodes, so even the largest K may miss an image whose
    // nodes are all farther than other images' nodes
    CHECK(knn_images(g, 0, (n - 1) * m).size() <= n - 1);
}

TEST_CASE("batch_knn does not depend on the thread count") {
    Engine rng(30);
    const AttributeGraph g(random_matrix(rng, 900, 8), 3);
    set_thread_count(1);
    const auto one = batch_knn(g, 15);
    set_thread_count(4);
    const auto four = batch_knn(g, 15);
    set_thread_count(0);
    CHECK(one == four);
    const std::vector<std::size_t> queries{7, 3, 250};
    const auto some = batch_knn(g, 15, queries);
    for (std::size_t i = 0; i < queries.size(); ++i) CHECK(some[i] == one[queries[i]]);
}

TEST_CASE("aggregate_neighbor_labels") {
    const std::vector<double> a{1, 0}, b{1, 1}, c{0, 1}, z{0, 0};
    std::vector<std::span<const double>> rows{a, b};
    CHECK(aggregate_neighbor_labels(rows) == std::vector<double>{1, 1});
    rows = {c};
    CHECK(aggregate_neighbor_labels(rows) == std::vector<double>{0, 1});
    rows = {z, z, z};
    CHECK(aggregate_neighbor_labels(rows) == std::vector<double>{0, 0});
    rows.clear();
    CHECK_THROWS_AS(aggregate_neighbor_labels(rows), DataError);
}

TEST_CASE("relabel_sample") {
    const auto r = relabel_sample(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 0.7);
    CHECK(r[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(relabel_sample(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 1.0) == std::vector<double>{1, 0});
    CHECK(relabel_sample(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 0.0) == std::vector<double>{0, 1});
    CHECK_THROWS_AS(relabel_sample(std::vector<double>{1}, std::vector<double>{0}, 1.5), ConfigError);
}

TEST_CASE("smooth_labels") {
    const LabelMatrix y(Matrix(2, 2, {1, 0, 0, 1}), LabelKind::binary);
    const auto s = smooth_labels(y, 0.1);
    CHECK(s.kind() == LabelKind::soft);
    CHECK(s.values()(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s.values()(0, 1) == doctest::Approx(0.1).epsilon(1e-15));
    const auto s3 = smooth_labels(y, 0.3);
    CHECK(s3.values()(1, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(s3.values()(1, 1) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(smooth_labels(y, 0.0).values() == y.values());
    CHECK_THROWS_AS(smooth_labels(y, 0.5), ConfigError);
    CHECK_THROWS_AS(smooth_labels(y, -0.1), ConfigError);
}

TEST_CASE("a2s on a small instance matches a hand-run oracle") {
    Engine rng(31);
    const std::size_t n = 6, c = 3, m = 2, z = 3, d = 4;
    const auto w = random_embeddings(rng, c, z);
    const Dataset data = validate_dataset(random_matrix(rng, n, d), random_labels(rng, n, c), w);
    const auto p = random_projector(rng, m, d, z);
    const RelabelConfig cfg{0.7, 3};
    const RelabelResult r = a2s(data, p, w, cfg);

    Matrix nodes(n * m, z);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix v = naive_projection(p, data.features.row(i));
        for (std::size_t a = 0; a < m; ++a) std::copy(v.row(a).begin(), v.row(a).end(), nodes.row(i * m + a).begin());
    }
    REQUIRE_FALSE(r.split.noisy_indices.empty());
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = data.labels.row(i);
        const bool clean = is_clean(naive_projection(p, data.features.row(i)), w, y);
        const auto out = r.relabeled.labels.row(i);
        if (clean) {
            CHECK(std::equal(out.begin(), out.end(), y.begin()));
            continue;
        }
        const auto neighbors = brute_knn(nodes, m, i, cfg.k);
        CHECK(r.neighbor_sets[i] == neighbors);
        for (std::size_t cls = 0; cls < c; ++cls) {
            double sum = 0.0;
            for (std::size_t j : neighbors) sum += data.labels.row(j)[cls];
            const double expected = 0.7 * y[cls] + 0.3 * std::min(1.0, sum);
            CHECK(out[cls] == doctest::Approx(expected).epsilon(1e-15));
            CHECK(out[cls] >= 0.7 * y[cls]);
            CHECK(out[cls] <= 1.0);
        }
    }
    CHECK(r.relabeled.labels.kind() == LabelKind::soft);
}

TEST_CASE("a2s endpoints") {
    Engine rng(32);
    const auto w = random_embeddings(rng, 4, 3);
    const Dataset data = validate_dataset(random_matrix(rng, 30, 5), random_labels(rng, 30, 4), w);
    const auto p = random_projector(rng, 2, 5, 3);
    const auto keep = a2s(data, p, w, {1.0, 10});
    CHECK(keep.relabeled.labels.values() == data.labels.values());
    const auto replace = a2s(data, p, w, {0.0, 10});
    for (std::size_t i : replace.split.noisy_indices) {
        std::vector<std::span<const double>> rows;
        for (std::size_t j : replace.neighbor_sets[i]) rows.push_back(data.labels.row(j));
        const auto agg = aggregate_neighbor_labels(rows);
        const auto out = replace.relabeled.labels.row(i);
        CHECK(std::equal(out.begin(), out.end(), agg.begin()));
    }
}

TEST_CASE("a2s keeps everything when all samples are clean") {
    const Matrix wm(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const auto w = EmbeddingMatrix::from_raw(wm);
    AttributeProjector p(1, 3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0});
    const Dataset data = validate_dataset(Matrix(3, 3, {0.9, 0.2, 0.1, 0.1, 0.8, 0.7, 0.3, 0.2, 0.9}),
                                          LabelMatrix(Matrix(3, 3, {1, 0, 0, 0, 1, 1, 0, 0, 1}), LabelKind::binary), w);
    const auto r = a2s(data, p, w, {});
    CHECK(r.split.noisy_indices.empty());
    CHECK(r.relabeled.labels.values() == data.labels.values());
}

TEST_CASE("relabel config") {
    CHECK_THROWS_AS((RelabelConfig{1.1, 5}.validate()), ConfigError);
    CHECK_THROWS_AS((RelabelConfig{0.5, 0}.validate()), ConfigError);
    CHECK_NOTHROW((RelabelConfig{}.validate()));
}
