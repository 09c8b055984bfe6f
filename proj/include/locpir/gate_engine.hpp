#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "locpir/torus.hpp"

namespace locpir {

enum class EngineKind : uint8_t { Clear = 0, TlweOracle = 1 };

inline const char* engine_kind_name(EngineKind k)
{
    return k == EngineKind::Clear ? "clear" : "tlwe-oracle";
}

inline EngineKind parse_engine_kind(std::string_view s)
{
    if (s == "clear")
        return EngineKind::Clear;
    if (s == "tlwe-oracle")
        return EngineKind::TlweOracle;
    throw std::invalid_argument("unknown engine \"" + std::string(s) +
                                "\" (expected clear or tlwe-oracle)");
}

struct GateCounterSnapshot {
    uint64_t and_gates = 0;
    uint64_t or_gates = 0;
    uint64_t xor_gates = 0;
    uint64_t xnor_gates = 0;
    uint64_t not_gates = 0;
    uint64_t mux_gates = 0;

    // NOT is free; a MUX costs two refreshes.
    uint64_t bootstrap_units() const
    {
        return and_gates + or_gates + xor_gates + xnor_gates + 2 * mux_gates;
    }

    std::map<std::string, uint64_t> as_map() const
    {
        return {{"and", and_gates},   {"or", or_gates},
                {"xor", xor_gates},   {"xnor", xnor_gates},
                {"not", not_gates},   {"mux", mux_gates},
                {"bootstrap_units", bootstrap_units()}};
    }
};

// Shared across engine forks; safe to bump from concurrent workers.
class GateCounter {
public:
    GateCounterSnapshot snapshot() const
    {
        return {and_.load(), or_.load(), xor_.load(),
                xnor_.load(), not_.load(), mux_.load()};
    }

    void reset()
    {
        and_ = or_ = xor_ = xnor_ = not_ = mux_ = 0;
    }

    void count_and() { and_.fetch_add(1, std::memory_order_relaxed); }
    void count_or() { or_.fetch_add(1, std::memory_order_relaxed); }
    void count_xor() { xor_.fetch_add(1, std::memory_order_relaxed); }
    void count_xnor() { xnor_.fetch_add(1, std::memory_order_relaxed); }
    void count_not() { not_.fetch_add(1, std::memory_order_relaxed); }
    void count_mux() { mux_.fetch_add(1, std::memory_order_relaxed); }

private:
    std::atomic<uint64_t> and_{0}, or_{0}, xor_{0}, xnor_{0}, not_{0}, mux_{0};
};

// One encrypted bit under a specific engine: a plain bit for the clear
// engine, a TLWE sample for the oracle engine. Bits never mix engines.
class CipherBit {
public:
    CipherBit() : payload_(false) {}
    explicit CipherBit(bool b) : payload_(b) {}
    explicit CipherBit(TlweSample s) : payload_(std::move(s)) {}

    EngineKind kind() const
    {
        return std::holds_alternative<bool>(payload_) ? EngineKind::Clear
                                                      : EngineKind::TlweOracle;
    }

    bool clear_bit() const
    {
        if (!std::holds_alternative<bool>(payload_))
            throw std::invalid_argument("cipher bit is not a clear-engine bit");
        return std::get<bool>(payload_);
    }

    const TlweSample& sample() const
    {
        if (!std::holds_alternative<TlweSample>(payload_))
            throw std::invalid_argument("cipher bit carries no TLWE sample");
        return std::get<TlweSample>(payload_);
    }

private:
    std::variant<bool, TlweSample> payload_;
};

// Functional stand-in for gate bootstrapping: thresholds the phase and
// re-encrypts with fresh mask and noise, so output noise is independent of
// input noise. Holding the secret key makes this INSECURE outside tests and
// demos; a production backend would replace it behind the same interface.
// Sign rule: phase in (0, 1/2] refreshes to an encryption of 1, anything
// else (including exactly 0) to an encryption of 0.
inline TlweSample bootstrap_oracle(const TlweSample& c, const SecretKey& sk,
                                   NoiseSampler& sampler)
{
    uint32_t p = phase(c, sk).raw;
    bool bit = p != 0 && p <= 0x80000000u;
    return encrypt_bit(bit, sk, sampler);
}

// Uniform two-implementation gate evaluator. Both implementations follow the
// same counting rules, so gate programs cost the same under either engine.
//
// Concurrency: fork() gives a worker its own noise stream while sharing the
// key and counters; gates on distinct bits may then run concurrently.
class GateEngine {
public:
    static GateEngine make_clear()
    {
        return GateEngine(EngineKind::Clear, nullptr, 0);
    }

    static GateEngine make_tlwe_oracle(SecretKey sk, uint64_t seed)
    {
        sk.params.validate();
        return GateEngine(EngineKind::TlweOracle,
                          std::make_shared<const SecretKey>(std::move(sk)), seed);
    }

    GateEngine fork(uint64_t lane) const
    {
        GateEngine child(*this);
        child.seed_ = child_seed(lane);
        child.sampler_ = NoiseSampler(child.seed_, sigma());
        return child;
    }

    // Monotone id shared across forks; callers mix it into fork lanes so
    // repeated parallel circuit calls draw distinct child noise streams.
    uint64_t acquire_fork_block() const { return fork_blocks_->fetch_add(1); }

    EngineKind kind() const { return kind_; }

    const TlweParams& params() const
    {
        require_oracle();
        return key_->params;
    }

    const SecretKey& secret_key() const
    {
        require_oracle();
        return *key_;
    }

    GateCounter& counters() { return *counters_; }
    const GateCounter& counters() const { return *counters_; }

    // Trivial (noiseless) bit; decryptable under any key; costs no gate.
    CipherBit constant(bool b) const
    {
        if (kind_ == EngineKind::Clear)
            return CipherBit(b);
        return CipherBit(trivial_sample(encode_bit(b), key_->params));
    }

    CipherBit encrypt(bool b)
    {
        if (kind_ == EngineKind::Clear)
            return CipherBit(b);
        return CipherBit(encrypt_bit(b, *key_, sampler_));
    }

    bool decrypt(const CipherBit& c) const
    {
        if (c.kind() == EngineKind::Clear)
            return c.clear_bit();
        require_oracle();
        return decrypt_bit(c.sample(), *key_);
    }

    CipherBit hom_and(const CipherBit& a, const CipherBit& b)
    {
        check_pair(a, b);
        counters_->count_and();
        if (kind_ == EngineKind::Clear)
            return CipherBit(a.clear_bit() && b.clear_bit());
        return CipherBit(refresh_gate(add_samples(
            add_samples(trivial_sample({0xE0000000u}, key_->params), a.sample()),
            b.sample())));
    }

    CipherBit hom_or(const CipherBit& a, const CipherBit& b)
    {
        check_pair(a, b);
        counters_->count_or();
        if (kind_ == EngineKind::Clear)
            return CipherBit(a.clear_bit() || b.clear_bit());
        return CipherBit(refresh_gate(add_samples(
            add_samples(trivial_sample({0x20000000u}, key_->params), a.sample()),
            b.sample())));
    }

    CipherBit hom_xor(const CipherBit& a, const CipherBit& b)
    {
        check_pair(a, b);
        counters_->count_xor();
        if (kind_ == EngineKind::Clear)
            return CipherBit(a.clear_bit() != b.clear_bit());
        return CipherBit(refresh_gate(
            add_samples(add_samples(trivial_sample({0x40000000u}, key_->params),
                                    scale_sample(2, a.sample())),
                        scale_sample(2, b.sample()))));
    }

    CipherBit hom_xnor(const CipherBit& a, const CipherBit& b)
    {
        check_pair(a, b);
        counters_->count_xnor();
        if (kind_ == EngineKind::Clear)
            return CipherBit(a.clear_bit() == b.clear_bit());
        return CipherBit(refresh_gate(
            add_samples(add_samples(trivial_sample({0xC0000000u}, key_->params),
                                    scale_sample(-2, a.sample())),
                        scale_sample(-2, b.sample()))));
    }

    // Componentwise negation; no refresh, the counter notes a free gate.
    CipherBit hom_not(const CipherBit& a) const
    {
        check_bit(a);
        counters_->count_not();
        if (kind_ == EngineKind::Clear)
            return CipherBit(!a.clear_bit());
        return CipherBit(neg_sample(a.sample()));
    }

    // sel ? a : b. Realized as refreshes of AND(sel, a) and AND(~sel, b),
    // linearly combined and refreshed once more; accounted as 2 units.
    CipherBit hom_mux(const CipherBit& sel, const CipherBit& a, const CipherBit& b)
    {
        check_pair(sel, a);
        check_pair(sel, b);
        counters_->count_mux();
        if (kind_ == EngineKind::Clear)
            return CipherBit(sel.clear_bit() ? a.clear_bit() : b.clear_bit());

        const TlweSample and_off = trivial_sample({0xE0000000u}, key_->params);
        TlweSample u = refresh(
            add_samples(add_samples(and_off, sel.sample()), a.sample()));
        TlweSample v = refresh(add_samples(
            add_samples(and_off, neg_sample(sel.sample())), b.sample()));
        return CipherBit(refresh_gate(add_samples(
            add_samples(u, v), trivial_sample({0x20000000u}, key_->params))));
    }

    // Exposed for noise experiments; counts nothing.
    TlweSample refresh(const TlweSample& c)
    {
        require_oracle();
        return bootstrap_oracle(c, *key_, sampler_);
    }

private:
    GateEngine(EngineKind kind, std::shared_ptr<const SecretKey> key, uint64_t seed)
        : kind_(kind),
          key_(std::move(key)),
          counters_(std::make_shared<GateCounter>()),
          fork_blocks_(std::make_shared<std::atomic<uint64_t>>(0)),
          seed_(seed),
          sampler_(seed, sigma_of(key_))
    {
    }

    static double sigma_of(const std::shared_ptr<const SecretKey>& key)
    {
        return key ? key->params.sigma : 0.0;
    }

    double sigma() const { return sigma_of(key_); }

    uint64_t child_seed(uint64_t lane) const
    {
        uint64_t x = seed_ + 0x9e3779b97f4a7c15ull * (lane + 1);
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    void require_oracle() const
    {
        if (kind_ != EngineKind::TlweOracle)
            throw std::logic_error("operation requires the tlwe-oracle engine");
    }

    void check_bit(const CipherBit& c) const
    {
        if (c.kind() != kind_)
            throw std::invalid_argument("cipher bit belongs to a different engine");
    }

    void check_pair(const CipherBit& a, const CipherBit& b) const
    {
        check_bit(a);
        check_bit(b);
    }

    TlweSample refresh_gate(const TlweSample& combo)
    {
        // Valid gate inputs leave the combined phase clear of the decision
        // boundary; |phase| <= 1/64 means the noise budget was blown.
        assert(std::abs(torus_to_double(phase(combo, *key_))) > 1.0 / 64);
        return bootstrap_oracle(combo, *key_, sampler_);
    }

    EngineKind kind_;
    std::shared_ptr<const SecretKey> key_;
    std::shared_ptr<GateCounter> counters_;
    std::shared_ptr<std::atomic<uint64_t>> fork_blocks_;
    uint64_t seed_;
    NoiseSampler sampler_;
};

}  // namespace locpir
