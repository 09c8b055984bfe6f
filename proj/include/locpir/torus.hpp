#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "locpir/bytes.hpp"

namespace locpir {

// One element of the discretized torus: the word w stands for the real
// fraction w / 2^32 modulo 1. Addition, negation and small integer scaling
// wrap modulo 2^32, so all linear algebra on samples is exact.
struct Torus32 {
    uint32_t raw = 0;

    friend Torus32 operator+(Torus32 a, Torus32 b) { return {a.raw + b.raw}; }
    friend Torus32 operator-(Torus32 a, Torus32 b) { return {a.raw - b.raw}; }
    Torus32 operator-() const { return {0u - raw}; }
    Torus32& operator+=(Torus32 o)
    {
        raw += o.raw;
        return *this;
    }
    friend Torus32 operator*(int32_t k, Torus32 t)
    {
        return {static_cast<uint32_t>(k) * t.raw};
    }
    friend bool operator==(Torus32 a, Torus32 b) { return a.raw == b.raw; }
};

// Nearest multiple of 2^-32; the cast wraps the half-up case frac = 1.0.
inline Torus32 torus_from_double(double x)
{
    double frac = x - std::floor(x);
    return {static_cast<uint32_t>(
        static_cast<uint64_t>(std::llround(frac * 4294967296.0)))};
}

// Signed fraction in [-1/2, 1/2).
inline double torus_to_double(Torus32 t)
{
    return static_cast<double>(static_cast<int32_t>(t.raw)) / 4294967296.0;
}

// Bit encoding m -> m/4 - 1/8: word 0x20000000 for 1, 0xE0000000 for 0.
inline Torus32 encode_bit(bool m)
{
    return {m ? 0x20000000u : 0xE0000000u};
}

enum class SecurityLevel : uint8_t { Sec80 = 0, Sec128 = 1, Custom = 2 };

inline const char* security_level_name(SecurityLevel s)
{
    switch (s) {
    case SecurityLevel::Sec80:
        return "sec80";
    case SecurityLevel::Sec128:
        return "sec128";
    default:
        return "custom";
    }
}

struct TlweParams {
    uint32_t n;
    double sigma;  // noise stddev as a torus fraction
    SecurityLevel level;

    static TlweParams sec80() { return {540, std::exp2(-20.2), SecurityLevel::Sec80}; }
    static TlweParams sec128() { return {630, std::exp2(-13.8), SecurityLevel::Sec128}; }

    static TlweParams custom(uint32_t n, double sigma)
    {
        TlweParams p{n, sigma, SecurityLevel::Custom};
        p.validate();
        return p;
    }

    static TlweParams for_level(SecurityLevel s)
    {
        switch (s) {
        case SecurityLevel::Sec80:
            return sec80();
        case SecurityLevel::Sec128:
            return sec128();
        default:
            throw std::invalid_argument("custom level needs explicit n and sigma");
        }
    }

    void validate() const
    {
        if (n == 0)
            throw std::invalid_argument("mask dimension n must be positive");
        if (sigma < 0.0 || !(sigma < 1.0))
            throw std::invalid_argument("sigma must lie in [0, 1)");
    }

    friend bool operator==(const TlweParams& a, const TlweParams& b)
    {
        return a.n == b.n && a.sigma == b.sigma && a.level == b.level;
    }
};

struct SecretKey {
    std::vector<uint8_t> bits;  // each 0 or 1, length n
    TlweParams params;
};

// Deterministic source for all mask and noise randomness. Gaussian draws are
// rounded to the nearest multiple of 2^-32.
class NoiseSampler {
public:
    NoiseSampler(uint64_t seed, double sigma) : rng_(seed), sigma_(sigma) {}

    Torus32 uniform() { return {static_cast<uint32_t>(rng_())}; }

    Torus32 gaussian()
    {
        if (sigma_ == 0.0)
            return {0};
        std::normal_distribution<double> dist(0.0, sigma_);
        return torus_from_double(dist(rng_));
    }

    double sigma() const { return sigma_; }

private:
    std::mt19937_64 rng_;
    double sigma_;
};

// One encrypted bit: mask vector a and body b = a.key + mu + e.
struct TlweSample {
    std::vector<Torus32> mask;
    Torus32 body;
};

inline SecretKey keygen(const TlweParams& params, uint64_t seed)
{
    params.validate();
    std::mt19937_64 rng(seed);
    SecretKey sk{std::vector<uint8_t>(params.n), params};
    for (auto& b : sk.bits)
        b = static_cast<uint8_t>(rng() & 1);
    return sk;
}

inline TlweSample trivial_sample(Torus32 mu, const TlweParams& params)
{
    return {std::vector<Torus32>(params.n), mu};
}

inline TlweSample encrypt_torus(Torus32 mu, const SecretKey& sk, NoiseSampler& sampler)
{
    TlweSample ct{std::vector<Torus32>(sk.params.n), mu + sampler.gaussian()};
    for (uint32_t i = 0; i < sk.params.n; i++) {
        ct.mask[i] = sampler.uniform();
        if (sk.bits[i])
            ct.body += ct.mask[i];
    }
    return ct;
}

inline TlweSample encrypt_bit(bool m, const SecretKey& sk, NoiseSampler& sampler)
{
    return encrypt_torus(encode_bit(m), sk, sampler);
}

inline Torus32 phase(const TlweSample& ct, const SecretKey& sk)
{
    if (ct.mask.size() != sk.bits.size())
        throw std::invalid_argument("sample/key dimension mismatch");
    Torus32 acc = ct.body;
    for (size_t i = 0; i < ct.mask.size(); i++)
        if (sk.bits[i])
            acc += -ct.mask[i];
    return acc;
}

// Rounds the phase to the nearer of {-1/8, 1/8}: words in [0, 0x80000000]
// (phase in [0, 1/2] as a signed fraction) decode to 1, the rest to 0.
// The tie at phase 0 resolves to 1.
inline bool decrypt_bit(const TlweSample& ct, const SecretKey& sk)
{
    return phase(ct, sk).raw <= 0x80000000u;
}

inline TlweSample add_samples(const TlweSample& c1, const TlweSample& c2)
{
    if (c1.mask.size() != c2.mask.size())
        throw std::invalid_argument("sample dimension mismatch");
    TlweSample out{std::vector<Torus32>(c1.mask.size()), c1.body + c2.body};
    for (size_t i = 0; i < out.mask.size(); i++)
        out.mask[i] = c1.mask[i] + c2.mask[i];
    return out;
}

inline TlweSample neg_sample(const TlweSample& c)
{
    TlweSample out{std::vector<Torus32>(c.mask.size()), -c.body};
    for (size_t i = 0; i < out.mask.size(); i++)
        out.mask[i] = -c.mask[i];
    return out;
}

inline TlweSample scale_sample(int32_t k, const TlweSample& c)
{
    if (k > 4 || k < -4)
        throw std::invalid_argument("scale factor limited to |k| <= 4");
    TlweSample out{std::vector<Torus32>(c.mask.size()), k * c.body};
    for (size_t i = 0; i < out.mask.size(); i++)
        out.mask[i] = k * c.mask[i];
    return out;
}

// --- serialization ------------------------------------------------------

// A sample is n+1 little-endian u32 words, mask first, body last.
inline size_t sample_byte_size(const TlweParams& params)
{
    return 4 * (static_cast<size_t>(params.n) + 1);
}

inline void write_sample(ByteWriter& w, const TlweSample& ct)
{
    for (const Torus32& t : ct.mask)
        w.u32(t.raw);
    w.u32(ct.body.raw);
}

inline TlweSample read_sample(ByteReader& r, uint32_t n)
{
    TlweSample ct{std::vector<Torus32>(n), {}};
    for (uint32_t i = 0; i < n; i++)
        ct.mask[i].raw = r.u32();
    ct.body.raw = r.u32();
    return ct;
}

inline std::vector<uint8_t> sample_to_bytes(const TlweSample& ct)
{
    ByteWriter w;
    write_sample(w, ct);
    return w.take();
}

// Key file: magic "LPSK", version u16, n u32, then ceil(n/8) packed bits
// (bit i lives at byte i/8, position i%8).
inline void save_secret_key(const std::string& path, const SecretKey& sk)
{
    ByteWriter w;
    w.bytes(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("LPSK"), 4));
    w.u16(1);
    w.u32(sk.params.n);
    std::vector<uint8_t> packed((sk.params.n + 7) / 8);
    for (uint32_t i = 0; i < sk.params.n; i++)
        if (sk.bits[i])
            packed[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    w.bytes(packed);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open key file for writing: " + path);
    out.write(reinterpret_cast<const char*>(w.data().data()),
              static_cast<std::streamsize>(w.size()));
    if (!out)
        throw std::runtime_error("short write to key file: " + path);
}

inline SecretKey load_secret_key(const std::string& path, const TlweParams& params)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open key file: " + path);
    std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    ByteReader r(raw);
    auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), "LPSK", 4) != 0)
        throw DecodeError("bad key file magic");
    uint16_t version = r.u16();
    if (version != 1)
        throw DecodeError("unsupported key file version " + std::to_string(version));
    uint32_t n = r.u32();
    if (n != params.n)
        throw DecodeError("key dimension " + std::to_string(n) +
                          " does not match parameter set n=" + std::to_string(params.n));
    auto packed = r.bytes((n + 7) / 8);
    r.expect_done();

    SecretKey sk{std::vector<uint8_t>(n), params};
    for (uint32_t i = 0; i < n; i++)
        sk.bits[i] = (packed[i / 8] >> (i % 8)) & 1;
    return sk;
}

}  // namespace locpir
