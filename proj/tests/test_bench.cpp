#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "locpir/bench.hpp"

using namespace locpir;

TEST_CASE("the closed-form count is N(12l + 2m + 3)")
{
    CHECK(predict_gate_units(9, 13, 9) == 1593);
    CHECK(predict_gate_units(9, 16, 9) == 1917);
    CHECK(predict_gate_units(10, 8, 9) == 1170);
    CHECK(predict_gate_units(10, 16, 9) == 2130);
    CHECK(predict_gate_units(1, 1, 1) == 17);
    CHECK_THROWS_AS(predict_gate_units(0, 8, 9), std::invalid_argument);

    // phase split sums to the total
    CHECK(comparison_units(9, 13) + validation_units(9, 9) + addxor_units(9, 9) ==
          predict_gate_units(9, 13, 9));
    CHECK(comparison_units(9, 13) == 1404);
    CHECK(validation_units(9, 9) == 108);
    CHECK(addxor_units(9, 9) == 81);
}

TEST_CASE("the count is exactly linear in N and in m")
{
    for (uint64_t N : {1ull, 3ull, 17ull})
        CHECK(predict_gate_units(2 * N, 16, 9) == 2 * predict_gate_units(N, 16, 9));
    // slope in m is 2N
    CHECK(predict_gate_units(7, 16, 10) - predict_gate_units(7, 16, 9) == 14);
}

TEST_CASE("unit ratios across word lengths track the published time ratios")
{
    const double base = static_cast<double>(predict_gate_units(10, 8, 9));
    const double published[] = {1.0, 1.88, 2.69, 3.58};
    const uint8_t lengths[] = {8, 16, 24, 32};
    for (int i = 0; i < 4; i++) {
        const double ratio = predict_gate_units(10, lengths[i], 9) / base;
        CHECK(std::abs(ratio / published[i] - 1.0) < 0.15);
    }
    // the predicted ratios themselves, to two decimals
    CHECK(std::round(100.0 * predict_gate_units(10, 16, 9) / base) == 182);
    CHECK(std::round(100.0 * predict_gate_units(10, 24, 9) / base) == 264);
    CHECK(std::round(100.0 * predict_gate_units(10, 32, 9) / base) == 346);
}

TEST_CASE("the wave budget lands within 2x of the published totals")
{
    // N=9, m=9, six workers, 13 ms per unit -> two waves
    const double t80 = budget_phase_ms(predict_gate_units(9, 13, 9), 9, 6, 13.0);
    const double t128 = budget_phase_ms(predict_gate_units(9, 16, 9), 9, 6, 13.0);
    CHECK(t80 == 4602.0);
    CHECK(t128 == 5538.0);
    CHECK(t80 / 4360.0 < 2.0);
    CHECK(4360.0 / t80 < 2.0);
    CHECK(t128 / 5670.0 < 2.0);
    CHECK(5670.0 / t128 < 2.0);

    // comparison dominates
    CHECK(static_cast<double>(comparison_units(9, 13)) /
              predict_gate_units(9, 13, 9) >=
          0.80);
    CHECK(static_cast<double>(comparison_units(9, 16)) /
              predict_gate_units(9, 16, 9) >=
          0.80);
}

TEST_CASE("sweeps cover the grid and verify themselves")
{
    BenchConfig cfg;
    cfg.region_counts = {2, 4};
    cfg.word_lengths = {8};
    cfg.service_bits = {4};
    cfg.thread_counts = {1, 2, 4};
    cfg.engine = EngineKind::Clear;

    const std::vector<PhaseReport> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2 * 1 * 1 * 3);

    for (const PhaseReport& r : rows) {
        CHECK(r.total_units() ==
              predict_gate_units(r.regions, r.word_bits, r.service_bits));
        CHECK(r.total_ms() > 0);
    }

    // same tuple, same answer regardless of threads; budget time non-increasing
    for (size_t i = 1; i < rows.size(); i++)
        if (rows[i].regions == rows[i - 1].regions) {
            CHECK(rows[i].retrieved == rows[i - 1].retrieved);
            CHECK(rows[i].total_ms() <= rows[i - 1].total_ms());
        }
}

TEST_CASE("oracle sweeps run the real pipeline")
{
    BenchConfig cfg;
    cfg.params = TlweParams::sec80();
    cfg.region_counts = {2};
    cfg.word_lengths = {8};
    cfg.service_bits = {2};
    cfg.thread_counts = {1, 2};
    cfg.engine = EngineKind::TlweOracle;
    cfg.per_gate_delay_ms = 0;  // measured mode

    const std::vector<PhaseReport> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].retrieved == rows[1].retrieved);
    CHECK(rows[0].comparison_ms > 0);  // real clock, oracle arithmetic
}

TEST_CASE("configs are validated before running")
{
    BenchConfig cfg;
    cfg.thread_counts = {};
    CHECK_THROWS_AS(run_sweep(cfg), std::invalid_argument);

    cfg = BenchConfig{};
    cfg.per_gate_delay_ms = -1;
    CHECK_THROWS_AS(run_sweep(cfg), std::invalid_argument);

    cfg = BenchConfig{};
    cfg.service_bits = {0};
    CHECK_THROWS_AS(run_sweep(cfg), std::invalid_argument);

    // too many regions for a short word
    cfg = BenchConfig{};
    cfg.region_counts = {20};
    cfg.word_lengths = {4};
    CHECK_THROWS_AS(run_sweep(cfg), std::invalid_argument);
}

TEST_CASE("CSV output uses the fixed column set")
{
    BenchConfig cfg;
    cfg.region_counts = {2};
    cfg.word_lengths = {8};
    cfg.service_bits = {4};
    cfg.thread_counts = {2};

    std::ostringstream out;
    write_csv(out, run_sweep(cfg));
    std::istringstream in(out.str());
    std::string header, row, extra;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, row));
    CHECK_FALSE(std::getline(in, extra));

    CHECK(header ==
          "params,N,l,m,n_t,engine,comparison_units,validation_units,"
          "addxor_units,total_units,comparison_ms,validation_ms,addxor_ms,"
          "total_ms");
    // N=2, l=8, m=4: 2*(96+8+3) = 214 total units, one wave of 107 units
    CHECK(row == "sec80,2,8,4,2,clear,192,14,8,214,1248,91,52,1391");
}
