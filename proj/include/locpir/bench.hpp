#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "locpir/circuits.hpp"
#include "locpir/codec.hpp"
#include "locpir/gate_engine.hpp"

namespace locpir {

// --- closed-form gate accounting --------------------------------------------

// Per region: 4 comparators of 3l units, 3 validation AND, m masking AND,
// m accumulation XOR.
inline uint64_t comparison_units(uint64_t regions, uint64_t word_bits)
{
    return regions * 12 * word_bits;
}

inline uint64_t validation_units(uint64_t regions, uint64_t service_bits)
{
    return regions * (3 + service_bits);
}

inline uint64_t addxor_units(uint64_t regions, uint64_t service_bits)
{
    return regions * service_bits;
}

inline uint64_t predict_gate_units(uint64_t regions, uint64_t word_bits,
                                   uint64_t service_bits)
{
    if (regions == 0 || word_bits == 0 || service_bits == 0)
        throw std::invalid_argument("gate prediction needs positive arguments");
    return comparison_units(regions, word_bits) +
           validation_units(regions, service_bits) +
           addxor_units(regions, service_bits);
}

// --- sweep configuration ------------------------------------------------------

struct BenchConfig {
    TlweParams params = TlweParams::sec80();
    std::vector<uint32_t> region_counts = {9};    // N
    std::vector<uint8_t> word_lengths = {16};     // l
    std::vector<uint32_t> service_bits = {9};     // m
    std::vector<unsigned> thread_counts = {1};    // n_t
    EngineKind engine = EngineKind::Clear;
    // Simulated milliseconds per bootstrap unit; 0 reports measured times
    // instead. 13 ms is a realistic single-core gate-bootstrap budget.
    double per_gate_delay_ms = 13.0;
    uint64_t seed = 1;

    void validate() const
    {
        params.validate();
        if (region_counts.empty() || word_lengths.empty() || service_bits.empty() ||
            thread_counts.empty())
            throw std::invalid_argument("sweep ranges must be non-empty");
        if (per_gate_delay_ms < 0)
            throw std::invalid_argument("per-gate delay must be >= 0");
        for (uint8_t l : word_lengths)
            if (l < 2)
                throw std::invalid_argument("word length must be at least 2 bits");
        for (uint32_t m : service_bits)
            if (m == 0 || m >= 64)
                throw std::invalid_argument("service bit-length out of range");
        for (unsigned t : thread_counts)
            if (t == 0)
                throw std::invalid_argument("thread counts must be positive");
    }
};

// One sweep row. The *_ms columns follow the configured time source: the
// wave budget model (units/region x delay x ceil(N/n_t)) when a per-gate
// delay is set, else the measured per-phase times. Measured times sum the
// workers' clocks, so they are CPU-milliseconds, not makespan.
struct PhaseReport {
    SecurityLevel level = SecurityLevel::Custom;
    uint32_t regions = 0;       // N
    uint8_t word_bits = 0;      // l
    uint32_t service_bits = 0;  // m
    unsigned threads = 0;       // n_t
    EngineKind engine = EngineKind::Clear;

    uint64_t comparison_units = 0;
    uint64_t validation_units = 0;
    uint64_t addxor_units = 0;
    double comparison_ms = 0;
    double validation_ms = 0;
    double addxor_ms = 0;

    uint64_t retrieved = 0;  // decrypted query answer, equal across n_t

    uint64_t total_units() const
    {
        return comparison_units + validation_units + addxor_units;
    }
    double total_ms() const { return comparison_ms + validation_ms + addxor_ms; }
};

inline const char* bench_csv_header()
{
    return "params,N,l,m,n_t,engine,comparison_units,validation_units,"
           "addxor_units,total_units,comparison_ms,validation_ms,addxor_ms,"
           "total_ms";
}

inline void write_csv_row(std::ostream& out, const PhaseReport& r)
{
    out << security_level_name(r.level) << ',' << r.regions << ','
        << static_cast<unsigned>(r.word_bits) << ',' << r.service_bits << ','
        << r.threads << ',' << engine_kind_name(r.engine) << ','
        << r.comparison_units << ',' << r.validation_units << ','
        << r.addxor_units << ',' << r.total_units() << ',' << r.comparison_ms
        << ',' << r.validation_ms << ',' << r.addxor_ms << ',' << r.total_ms()
        << '\n';
}

inline void write_csv(std::ostream& out, const std::vector<PhaseReport>& rows)
{
    out << bench_csv_header() << '\n';
    for (const PhaseReport& r : rows)
        write_csv_row(out, r);
}

namespace detail {

// Fixed-point format carrying exactly l bits; integer part capped at the
// geographic 9 bits, so longer words buy grid precision.
inline FixedPointFormat format_for_length(uint8_t l)
{
    const uint8_t int_bits = std::min<uint8_t>(9, l - 1);
    return {int_bits, static_cast<uint8_t>(l - int_bits)};
}

// N disjoint boxes of 4x4 grid cells along the diagonal, services from a
// fixed pattern; the query point sits inside the middle box.
struct SyntheticCase {
    std::vector<EncodedRegion> regions;
    CipherWord x, y;
    uint64_t expected = 0;
};

inline SyntheticCase synthetic_case(uint32_t N, uint8_t l, uint32_t m,
                                    GateEngine& engine, NoiseSampler* client,
                                    const SecretKey* sk)
{
    const FixedPointFormat fmt = format_for_length(l);
    const int64_t step = 4;
    if (static_cast<int64_t>(N) * step >= (1ll << (l - 1)))
        throw std::invalid_argument("too many regions for the word length");

    auto boundary = [&](int64_t g) {
        return constant_word(PlainWord::from_integer(g, fmt), engine);
    };

    std::vector<uint64_t> services(N);
    for (uint32_t i = 0; i < N; i++)
        services[i] = (37ull * i + 11) & ((1ull << m) - 1);
    std::vector<ServiceCiphertext> svc = trivial_services(services, m, engine);

    SyntheticCase c;
    c.regions.resize(N);
    for (uint32_t i = 0; i < N; i++) {
        const int64_t lo = static_cast<int64_t>(i) * step;
        c.regions[i] = {boundary(lo),        boundary(lo + step),
                        boundary(lo),        boundary(lo + step),
                        std::move(svc[i]),   i};
    }

    const uint32_t target = (N - 1) / 2;
    const PlainWord point =
        PlainWord::from_integer(static_cast<int64_t>(target) * step + 2, fmt);
    if (sk) {
        c.x = encrypt_word(point, *sk, *client);
        c.y = encrypt_word(point, *sk, *client);
    } else {
        c.x = encrypt_word(point, engine);
        c.y = encrypt_word(point, engine);
    }
    c.expected = services[target];
    return c;
}

}  // namespace detail

// Wave budget: with n_t workers, regions evaluate in ceil(N/n_t) waves of
// one region's gate sequence each.
inline double budget_phase_ms(uint64_t phase_units, uint32_t regions,
                              unsigned threads, double per_gate_delay_ms)
{
    const uint64_t waves = (regions + threads - 1) / threads;
    const double per_region = static_cast<double>(phase_units) / regions;
    return per_region * per_gate_delay_ms * static_cast<double>(waves);
}

// Runs every (N, l, m, n_t) tuple, checking on the way that the engine
// counters reproduce the closed-form counts, that the retrieved value is the
// plaintext truth, and that it is identical across thread counts.
inline std::vector<PhaseReport> run_sweep(const BenchConfig& cfg)
{
    cfg.validate();

    std::vector<PhaseReport> rows;
    for (uint32_t N : cfg.region_counts)
        for (uint8_t l : cfg.word_lengths)
            for (uint32_t m : cfg.service_bits) {
                bool have_baseline = false;
                uint64_t baseline = 0;
                for (unsigned n_t : cfg.thread_counts) {
                    GateEngine engine = GateEngine::make_clear();
                    SecretKey sk{{}, TlweParams{0, 0.0, SecurityLevel::Custom}};
                    NoiseSampler client(cfg.seed + 1, cfg.params.sigma);
                    const bool oracle = cfg.engine == EngineKind::TlweOracle;
                    if (oracle) {
                        sk = keygen(cfg.params, cfg.seed);
                        engine = GateEngine::make_tlwe_oracle(sk, cfg.seed);
                    }

                    detail::SyntheticCase c = detail::synthetic_case(
                        N, l, m, engine, oracle ? &client : nullptr,
                        oracle ? &sk : nullptr);

                    engine.counters().reset();
                    PhaseTimes times;
                    const ServiceCiphertext out =
                        loc_pir(c.x, c.y, c.regions, engine, n_t, &times);
                    const uint64_t got = decrypt_service(out, engine);
                    const GateCounterSnapshot s = engine.counters().snapshot();

                    if (s.bootstrap_units() != predict_gate_units(N, l, m))
                        throw std::logic_error("gate counters diverge from the model");
                    if (got != c.expected)
                        throw std::logic_error("sweep retrieval returned " +
                                               std::to_string(got) + ", expected " +
                                               std::to_string(c.expected));
                    if (!have_baseline) {
                        baseline = got;
                        have_baseline = true;
                    } else if (got != baseline) {
                        throw std::logic_error(
                            "retrieval depends on the thread count");
                    }

                    PhaseReport r;
                    r.level = cfg.params.level;
                    r.regions = N;
                    r.word_bits = l;
                    r.service_bits = m;
                    r.threads = n_t;
                    r.engine = cfg.engine;
                    r.comparison_units = comparison_units(N, l);
                    r.validation_units = validation_units(N, m);
                    r.addxor_units = addxor_units(N, m);
                    r.retrieved = got;

                    if (cfg.per_gate_delay_ms > 0) {
                        r.comparison_ms = budget_phase_ms(r.comparison_units, N, n_t,
                                                          cfg.per_gate_delay_ms);
                        r.validation_ms = budget_phase_ms(r.validation_units, N, n_t,
                                                          cfg.per_gate_delay_ms);
                        r.addxor_ms = budget_phase_ms(r.addxor_units, N, n_t,
                                                      cfg.per_gate_delay_ms);
                    } else {
                        r.comparison_ms = times.comparison_ns.load() / 1e6;
                        r.validation_ms = times.validation_ns.load() / 1e6;
                        r.addxor_ms = times.addxor_ns.load() / 1e6;
                    }
                    rows.push_back(r);
                }
            }
    return rows;
}

}  // namespace locpir
