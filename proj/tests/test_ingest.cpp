#include "qxct/common.hpp"
#include "qxct/ingest.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace qxct;
using namespace qxct::ingest;

namespace {

ExpressionMatrix parse(const std::string& text) {
    std::istringstream in(text);
    return parse_matrix(in, {}, "test");
}

ExpressionMatrix matrix(std::vector<std::string> genes, std::initializer_list<std::initializer_list<double>> rows) {
    ExpressionMatrix m;
    m.gene_names = std::move(genes);
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.gene_names.size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (const double v : row) {
            m.values(r, c++) = v;
        }
        ++r;
    }
    return m;
}

} // namespace

TEST_CASE("basis index round trip") {
    CHECK(bitstring_to_index("01") == 2);
    CHECK(index_to_bitstring(2, 2) == "01");
    for (int d = 1; d <= kMaxQubits; ++d) {
        for (BasisIndex i = 0; i < basis_size(d); i += (d > 8 ? 37 : 1)) {
            REQUIRE(bitstring_to_index(index_to_bitstring(i, d)) == i);
        }
    }
    CHECK_THROWS_AS(bitstring_to_index("0a"), Error);
    CHECK_THROWS_AS(bitstring_to_index(""), Error);
}

TEST_CASE("parse a small matrix") {
    const auto m = parse("g1,g2\n0,3\n1,0\n");
    REQUIRE(m.gene_names == std::vector<std::string>{"g1", "g2"});
    REQUIRE(m.cell_count() == 2);
    CHECK(m.values(0, 0) == 0.0);
    CHECK(m.values(0, 1) == 3.0);
    CHECK(m.values(1, 0) == 1.0);
    CHECK(m.values(1, 1) == 0.0);

    const auto tsv = parse("a\tb\n1.5\t2\n");
    CHECK(tsv.values(0, 0) == 1.5);
}

TEST_CASE("parse errors carry their location") {
    CHECK_THROWS_WITH_AS(parse("g1,g2\n"), doctest::Contains("no cells"), ParseError);
    CHECK_THROWS_WITH_AS(parse("g1,g1\n1,2\n"), doctest::Contains("duplicate"), ParseError);
    try {
        parse("g1,g2\n1,2\n3,x\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
        CHECK(e.column() == 2);
    }
    CHECK_THROWS_AS(parse("g1,g2\n1,-2\n"), ParseError);
    CHECK_THROWS_AS(parse("g1,g2\n1\n"), ParseError);
}

TEST_CASE("write then parse is lossless") {
    std::mt19937_64 rng(5);
    ExpressionMatrix m;
    m.gene_names = {"a", "b", "c"};
    m.values.resize(7, 3);
    for (Eigen::Index r = 0; r < 7; ++r) {
        for (Eigen::Index c = 0; c < 3; ++c) {
            m.values(r, c) = std::floor(testing::uniform(rng, 0.0, 50.0));
        }
    }
    std::stringstream s;
    write_matrix(s, m);
    const auto back = parse_matrix(s, {}, "roundtrip");
    CHECK(back.gene_names == m.gene_names);
    CHECK(back.values == m.values);
}

TEST_CASE("log_normalize") {
    SUBCASE("single cell already at the median") {
        const auto n = log_normalize(matrix({"a", "b"}, {{0.0, std::numbers::e - 1.0}}));
        CHECK(n.values(0, 0) == 0.0);
        CHECK(n.values(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero column stays zero") {
        const auto n = log_normalize(matrix({"a", "b"}, {{0.0, 4.0}, {0.0, 7.0}}));
        CHECK(n.values.col(0).isZero());
    }
    SUBCASE("cells scale to the median library size") {
        const auto n = log_normalize(matrix({"a", "b"}, {{4.0, 6.0}, {10.0, 20.0}}));
        for (Eigen::Index r = 0; r < 2; ++r) {
            const double scaled = n.values.row(r).unaryExpr([](double x) { return std::expm1(x); }).sum();
            CHECK(scaled == doctest::Approx(20.0).epsilon(1e-12));
        }
    }
    SUBCASE("empty cell is rejected") {
        CHECK_THROWS_WITH_AS(log_normalize(matrix({"a"}, {{1.0}, {0.0}})), doctest::Contains("cell 1"), Error);
    }
}

TEST_CASE("binarize") {
    const GeneSelection sel{"CT", {"ga", "gb"}};
    SUBCASE("zero is inactive") {
        const auto h = binarize(matrix({"ga", "gb"}, {{0.0, 1.2}}), sel);
        CHECK(h.count("01") == 1);
        CHECK(h.total() == 1);
    }
    SUBCASE("identical cells accumulate") {
        const auto h = binarize(matrix({"ga", "gb"}, {{2.0, 2.0}, {2.0, 2.0}, {2.0, 2.0}}), sel);
        CHECK(h.count("11") == 3);
        CHECK(h.nonzero().size() == 1);
    }
    SUBCASE("per-cell thresholding") {
        const auto h = binarize(matrix({"ga", "gb"}, {{0.0, 0.0}, {0.5, 0.0}}), sel);
        CHECK(h.count("00") == 1);
        CHECK(h.count("10") == 1);
    }
    SUBCASE("selection order defines qubits") {
        const auto h = binarize(matrix({"ga", "gb"}, {{0.0, 1.0}}), GeneSelection{"CT", {"gb", "ga"}});
        CHECK(h.count("10") == 1);
    }
    CHECK_THROWS_AS(binarize(matrix({"ga"}, {{1.0}}), GeneSelection{"CT", {"missing"}}), Error);
}

TEST_CASE("amplitudes and target distribution") {
    StateHistogram h(2);
    h.add("00", 3);
    h.add("11", 4);
    const auto a = amplitudes(h);
    CHECK(a.amplitudes[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(a.amplitudes[3] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(a.amplitudes[1] == 0.0);
    CHECK(a.amplitudes[2] == 0.0);
    const auto q = target_distribution(h);
    CHECK(q.probabilities[0] == doctest::Approx(0.36).epsilon(1e-15));
    CHECK(q.probabilities[3] == doctest::Approx(0.64).epsilon(1e-15));

    StateHistogram one(1);
    one.add("0", 5);
    CHECK(amplitudes(one).amplitudes[0] == 1.0);

    StateHistogram even(1);
    even.add("0");
    even.add("1");
    CHECK(amplitudes(even).amplitudes[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(target_distribution(even).probabilities[0] == doctest::Approx(0.5));

    StateHistogram only_one(1);
    only_one.add("1", 7);
    CHECK(target_distribution(only_one).probabilities == std::vector<double>{0.0, 1.0});

    CHECK_THROWS_AS(amplitudes(StateHistogram(2)), Error);
}

TEST_CASE("amplitudes are unit-norm and match squared counts (property)") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 6);
        StateHistogram h(d);
        double sq = 0.0;
        for (BasisIndex i = 0; i < basis_size(d); ++i) {
            const auto c = rng() % 4 == 0 ? 0 : rng() % 50;
            h.add_index(i, c);
            sq += static_cast<double>(c * c);
        }
        if (h.total() == 0) {
            continue;
        }
        const auto a = amplitudes(h);
        const auto q = target_distribution(h);
        double norm = 0.0;
        for (BasisIndex i = 0; i < basis_size(d); ++i) {
            norm += a.amplitudes[i] * a.amplitudes[i];
            const double c = static_cast<double>(h.count_at(i));
            REQUIRE(q.probabilities[i] == doctest::Approx(c * c / sq).epsilon(1e-12));
        }
        REQUIRE(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
}
