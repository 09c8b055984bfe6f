#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "locpir/codec.hpp"
#include "locpir/gate_engine.hpp"
#include "locpir/parallel.hpp"

namespace locpir {

// m cipher bits, index 0 = LSB of the service integer.
struct ServiceCiphertext {
    std::vector<CipherBit> bits;
};

// One bounding box: boundary words (trivial ciphertexts on the server) and
// the encrypted service. Plaintext edges satisfy x1 < x2 and y1 < y2.
struct EncodedRegion {
    CipherWord x1, x2;  // latitude interval [x1, x2)
    CipherWord y1, y2;  // longitude interval [y1, y2)
    ServiceCiphertext service;
    uint32_t region_id = 0;
};

// Client-uploaded fresh encryptions of 0, consumed one-time-pad style to
// turn the server's plaintext service bits into ciphertexts.
class ZeroSampleSheet {
public:
    ZeroSampleSheet(std::vector<TlweSample> samples, uint32_t regions,
                    uint32_t bits_per_service)
        : samples_(std::move(samples)),
          used_(static_cast<size_t>(regions) * bits_per_service, 0),
          regions_(regions),
          bits_(bits_per_service)
    {
        if (samples_.size() != used_.size())
            throw std::invalid_argument("zero-sample sheet has wrong sample count");
    }

    // Samples carry the torus message 0 (not the bit encoding -1/8), so
    // adding a trivial +-1/8 encoding later yields a well-formed bit.
    static ZeroSampleSheet generate(const SecretKey& sk, uint32_t regions,
                                    uint32_t bits_per_service, NoiseSampler& sampler)
    {
        std::vector<TlweSample> samples;
        samples.reserve(static_cast<size_t>(regions) * bits_per_service);
        for (size_t i = 0; i < static_cast<size_t>(regions) * bits_per_service; i++)
            samples.push_back(encrypt_torus({0}, sk, sampler));
        return ZeroSampleSheet(std::move(samples), regions, bits_per_service);
    }

    uint32_t regions() const { return regions_; }
    uint32_t bits_per_service() const { return bits_; }
    uint32_t dimension() const
    {
        return samples_.empty() ? 0 : static_cast<uint32_t>(samples_[0].mask.size());
    }
    bool fresh() const
    {
        for (uint8_t u : used_)
            if (u)
                return false;
        return true;
    }

    // One-time use: taking a sample twice is an error.
    const TlweSample& take(uint32_t region, uint32_t bit)
    {
        const size_t idx = static_cast<size_t>(region) * bits_ + bit;
        if (region >= regions_ || bit >= bits_)
            throw std::out_of_range("zero-sample index out of range");
        if (used_[idx])
            throw std::logic_error("zero sample consumed twice");
        used_[idx] = 1;
        return samples_[idx];
    }

    // Region-major, bit-minor, LSB first; raw sample blocks.
    std::vector<uint8_t> to_payload() const
    {
        ByteWriter w;
        for (const TlweSample& s : samples_)
            write_sample(w, s);
        return w.take();
    }

    static ZeroSampleSheet from_payload(std::span<const uint8_t> payload,
                                        const TlweParams& params, uint32_t regions,
                                        uint32_t bits_per_service)
    {
        const size_t want =
            static_cast<size_t>(regions) * bits_per_service * sample_byte_size(params);
        if (payload.size() != want)
            throw DecodeError("zero-sample sheet payload is " +
                              std::to_string(payload.size()) + " bytes, expected " +
                              std::to_string(want));
        ByteReader r(payload);
        std::vector<TlweSample> samples;
        samples.reserve(static_cast<size_t>(regions) * bits_per_service);
        for (size_t i = 0; i < static_cast<size_t>(regions) * bits_per_service; i++)
            samples.push_back(read_sample(r, params.n));
        return ZeroSampleSheet(std::move(samples), regions, bits_per_service);
    }

private:
    std::vector<TlweSample> samples_;
    std::vector<uint8_t> used_;
    uint32_t regions_;
    uint32_t bits_;
};

// Encrypts each service value bitwise by adding a fresh zero sample to the
// trivial encoding of the bit. Consumes the whole sheet.
inline std::vector<ServiceCiphertext> preprocess_services(
    const std::vector<uint64_t>& values, ZeroSampleSheet& sheet,
    uint32_t bits_per_service)
{
    if (bits_per_service != sheet.bits_per_service() ||
        values.size() != sheet.regions())
        throw std::invalid_argument("service table does not match the sheet shape");
    if (!sheet.fresh())
        throw std::logic_error("zero-sample sheet was already consumed");
    if (bits_per_service >= 64)
        throw std::invalid_argument("service bit-length out of range");

    const TlweParams params{sheet.dimension(), 0.0, SecurityLevel::Custom};
    std::vector<ServiceCiphertext> out(values.size());
    for (size_t i = 0; i < values.size(); i++) {
        if (values[i] >> bits_per_service)
            throw std::out_of_range("service value " + std::to_string(values[i]) +
                                    " does not fit in " +
                                    std::to_string(bits_per_service) + " bits");
        out[i].bits.reserve(bits_per_service);
        for (uint32_t j = 0; j < bits_per_service; j++) {
            const bool bit = (values[i] >> j) & 1;
            const TlweSample& fresh = sheet.take(static_cast<uint32_t>(i), j);
            out[i].bits.emplace_back(
                add_samples(trivial_sample(encode_bit(bit), params), fresh));
        }
    }
    return out;
}

// Constant (trivial) service bits under either engine; handy where the
// one-time sheet flow is not part of the test.
inline std::vector<ServiceCiphertext> trivial_services(
    const std::vector<uint64_t>& values, uint32_t bits_per_service,
    const GateEngine& engine)
{
    std::vector<ServiceCiphertext> out(values.size());
    for (size_t i = 0; i < values.size(); i++) {
        if (bits_per_service < 64 && (values[i] >> bits_per_service))
            throw std::out_of_range("service value does not fit");
        out[i].bits.reserve(bits_per_service);
        for (uint32_t j = 0; j < bits_per_service; j++)
            out[i].bits.push_back(engine.constant((values[i] >> j) & 1));
    }
    return out;
}

inline uint64_t decrypt_service(const ServiceCiphertext& s, const SecretKey& sk)
{
    uint64_t v = 0;
    for (size_t j = 0; j < s.bits.size(); j++) {
        const CipherBit& b = s.bits[j];
        const bool bit =
            b.kind() == EngineKind::Clear ? b.clear_bit() : decrypt_bit(b.sample(), sk);
        if (bit)
            v |= 1ull << j;
    }
    return v;
}

inline uint64_t decrypt_service(const ServiceCiphertext& s, const GateEngine& engine)
{
    uint64_t v = 0;
    for (size_t j = 0; j < s.bits.size(); j++)
        if (engine.decrypt(s.bits[j]))
            v |= 1ull << j;
    return v;
}

// Bit-serial signed less-than: decrypts to 1 iff signed(a) < signed(b).
// Flipping both sign bits reduces signed order to the unsigned scan; the
// LSB->MSB loop leaves the verdict of the most significant differing
// position in t0. Costs l XNOR + l MUX = 3l units.
inline CipherBit hom_less(const CipherWord& a, const CipherWord& b, GateEngine& engine)
{
    if (a.bits.size() != b.bits.size() || !(a.format == b.format))
        throw std::invalid_argument("comparator operands must share length and format");
    if (a.bits.empty())
        throw std::invalid_argument("comparator operands must be non-empty");

    const size_t l = a.bits.size();
    CipherBit a_sign = engine.hom_not(a.bits[l - 1]);
    CipherBit b_sign = engine.hom_not(b.bits[l - 1]);
    CipherBit t0 = engine.constant(false);
    for (size_t i = 0; i < l; i++) {
        const CipherBit& ai = (i + 1 == l) ? a_sign : a.bits[i];
        const CipherBit& bi = (i + 1 == l) ? b_sign : b.bits[i];
        CipherBit t1 = engine.hom_xnor(ai, bi);
        t0 = engine.hom_mux(t1, t0, bi);
    }
    return t0;
}

// a <= b, realized as NOT(b < a); the negation is free.
inline CipherBit hom_less_equal(const CipherWord& a, const CipherWord& b,
                                GateEngine& engine)
{
    return engine.hom_not(hom_less(b, a, engine));
}

// Keeps s where flag decrypts to 1, zeroes it otherwise. Costs m AND units.
inline ServiceCiphertext mask_service(const CipherBit& flag,
                                      const ServiceCiphertext& s, GateEngine& engine)
{
    ServiceCiphertext out;
    out.bits.reserve(s.bits.size());
    for (const CipherBit& b : s.bits)
        out.bits.push_back(engine.hom_and(flag, b));
    return out;
}

// Per-phase wall-clock accumulators (nanoseconds), summed across workers.
struct PhaseTimes {
    std::atomic<int64_t> comparison_ns{0};
    std::atomic<int64_t> validation_ns{0};
    std::atomic<int64_t> addxor_ns{0};
};

// Bitwise XOR accumulation into an Enc(0)-initialized accumulator. Correct
// when at most one input is a nonzero encryption (disjoint boxes guarantee
// this); decrypts to that input, or 0 if none. Costs N*m XOR units for any
// worker count: parallelism splits the bit columns, not the chain.
inline ServiceCiphertext xor_sum_services(const std::vector<ServiceCiphertext>& inputs,
                                          GateEngine& engine, unsigned workers = 1,
                                          PhaseTimes* times = nullptr)
{
    if (inputs.empty())
        return {};
    const size_t m = inputs[0].bits.size();
    for (const auto& s : inputs)
        if (s.bits.size() != m)
            throw std::invalid_argument("service ciphertexts must share bit-length");

    ServiceCiphertext out;
    out.bits.resize(m);
    const uint64_t block = engine.acquire_fork_block();
    parallel_blocks(m, workers, [&](unsigned w, size_t lo, size_t hi) {
        GateEngine local = engine.fork((block << 16) | w);
        const auto start = std::chrono::steady_clock::now();
        for (size_t j = lo; j < hi; j++) {
            CipherBit acc = local.constant(false);
            for (const auto& s : inputs)
                acc = local.hom_xor(acc, s.bits[j]);
            out.bits[j] = std::move(acc);
        }
        if (times)
            times->addxor_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
    });
    return out;
}

// Full retrieval circuit: interval checks per region, validation ANDs,
// service masking, then the XOR sum. Membership is half-open,
// lat in [x1, x2) and lon in [y1, y2). Regions evaluate independently
// across workers; results are worker-count invariant after decryption.
// Costs N*(12l + 2m + 3) units.
inline ServiceCiphertext loc_pir(const CipherWord& x, const CipherWord& y,
                                 const std::vector<EncodedRegion>& regions,
                                 GateEngine& engine, unsigned workers = 1,
                                 PhaseTimes* times = nullptr)
{
    if (regions.empty())
        return {};
    if (!(x.format == y.format))
        throw std::invalid_argument("coordinate words must share a format");
    const size_t m = regions[0].service.bits.size();
    for (const EncodedRegion& r : regions) {
        if (!(r.x1.format == x.format) || !(r.x2.format == x.format) ||
            !(r.y1.format == y.format) || !(r.y2.format == y.format))
            throw std::invalid_argument("region boundary format mismatch");
        if (r.service.bits.size() != m)
            throw std::invalid_argument("regions must share the service bit-length");
    }

    std::vector<ServiceCiphertext> masked(regions.size());
    const uint64_t block = engine.acquire_fork_block();
    parallel_blocks(regions.size(), workers, [&](unsigned w, size_t lo, size_t hi) {
        GateEngine local = engine.fork((block << 16) | w);
        for (size_t i = lo; i < hi; i++) {
            const EncodedRegion& r = regions[i];

            const auto t0 = std::chrono::steady_clock::now();
            CipherBit x_l = hom_less_equal(r.x1, x, local);
            CipherBit x_r = hom_less(x, r.x2, local);
            CipherBit y_l = hom_less_equal(r.y1, y, local);
            CipherBit y_r = hom_less(y, r.y2, local);
            const auto t1 = std::chrono::steady_clock::now();

            CipherBit v1 = local.hom_and(x_l, x_r);
            CipherBit v2 = local.hom_and(y_l, y_r);
            CipherBit f = local.hom_and(v1, v2);
            masked[i] = mask_service(f, r.service, local);
            const auto t2 = std::chrono::steady_clock::now();

            if (times) {
                times->comparison_ns +=
                    std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
                times->validation_ns +=
                    std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count();
            }
        }
    });

    return xor_sum_services(masked, engine, workers, times);
}

}  // namespace locpir
