#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "locpir/gate_engine.hpp"
#include "locpir/torus.hpp"

namespace locpir {

// Two's-complement fixed point: int_bits for the integer part (sign
// included), frac_bits for the fraction. The 9+7 default covers the
// full latitude/longitude range at 1/128 degree resolution.
struct FixedPointFormat {
    uint8_t int_bits = 9;
    uint8_t frac_bits = 7;

    uint8_t total_bits() const { return static_cast<uint8_t>(int_bits + frac_bits); }

    void validate() const
    {
        if (int_bits < 1)
            throw std::invalid_argument("fixed-point format needs a sign bit");
        if (total_bits() < 2 || int_bits + frac_bits > 63)
            throw std::invalid_argument("fixed-point width out of range");
    }

    friend bool operator==(const FixedPointFormat& a, const FixedPointFormat& b)
    {
        return a.int_bits == b.int_bits && a.frac_bits == b.frac_bits;
    }
};

struct GeoCoordinate {
    double lat;
    double lon;

    GeoCoordinate(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg)
    {
        if (!(lat >= -90.0 && lat <= 90.0))
            throw std::out_of_range("latitude outside [-90, 90]");
        if (!(lon >= -180.0 && lon <= 180.0))
            throw std::out_of_range("longitude outside [-180, 180]");
    }
};

// l bits, index 0 = least significant.
struct PlainWord {
    std::vector<uint8_t> bits;
    FixedPointFormat format;

    int64_t signed_value() const
    {
        const size_t l = bits.size();
        uint64_t u = 0;
        for (size_t i = 0; i < l; i++)
            if (bits[i])
                u |= 1ull << i;
        if (bits[l - 1])
            u |= ~((1ull << l) - 1);  // sign extend
        return static_cast<int64_t>(u);
    }

    static PlainWord from_integer(int64_t v, FixedPointFormat fmt)
    {
        fmt.validate();
        const int l = fmt.total_bits();
        const int64_t lo = -(1ll << (l - 1));
        const int64_t hi = (1ll << (l - 1)) - 1;
        if (v < lo || v > hi)
            throw std::out_of_range("value does not fit in " + std::to_string(l) +
                                    " bits");
        PlainWord w{std::vector<uint8_t>(l), fmt};
        uint64_t u = static_cast<uint64_t>(v);
        for (int i = 0; i < l; i++)
            w.bits[i] = (u >> i) & 1;
        return w;
    }

    friend bool operator==(const PlainWord& a, const PlainWord& b)
    {
        return a.bits == b.bits && a.format == b.format;
    }
};

// Degrees -> scaled integer, rounding ties away from zero.
inline int64_t scale_to_grid(double v, FixedPointFormat fmt)
{
    return std::llround(v * static_cast<double>(1ll << fmt.frac_bits));
}

inline PlainWord encode_fixed(double v, FixedPointFormat fmt)
{
    return PlainWord::from_integer(scale_to_grid(v, fmt), fmt);
}

inline double decode_fixed(const PlainWord& w)
{
    return static_cast<double>(w.signed_value()) /
           static_cast<double>(1ll << w.format.frac_bits);
}

// l cipher bits, index 0 = least significant; all bits share one engine.
struct CipherWord {
    std::vector<CipherBit> bits;
    FixedPointFormat format;
};

inline CipherWord encrypt_word(const PlainWord& w, const SecretKey& sk,
                               NoiseSampler& sampler)
{
    CipherWord cw{{}, w.format};
    cw.bits.reserve(w.bits.size());
    for (uint8_t b : w.bits)
        cw.bits.emplace_back(encrypt_bit(b != 0, sk, sampler));
    return cw;
}

// Trivial/constant bits under the given engine; used for server-known words.
inline CipherWord constant_word(const PlainWord& w, const GateEngine& engine)
{
    CipherWord cw{{}, w.format};
    cw.bits.reserve(w.bits.size());
    for (uint8_t b : w.bits)
        cw.bits.push_back(engine.constant(b != 0));
    return cw;
}

inline CipherWord encrypt_word(const PlainWord& w, GateEngine& engine)
{
    CipherWord cw{{}, w.format};
    cw.bits.reserve(w.bits.size());
    for (uint8_t b : w.bits)
        cw.bits.push_back(engine.encrypt(b != 0));
    return cw;
}

inline PlainWord decrypt_word(const CipherWord& cw, const SecretKey& sk)
{
    PlainWord w{std::vector<uint8_t>(cw.bits.size()), cw.format};
    for (size_t i = 0; i < cw.bits.size(); i++) {
        const CipherBit& b = cw.bits[i];
        w.bits[i] = b.kind() == EngineKind::Clear ? b.clear_bit()
                                                  : decrypt_bit(b.sample(), sk);
    }
    return w;
}

inline PlainWord decrypt_word(const CipherWord& cw, const GateEngine& engine)
{
    PlainWord w{std::vector<uint8_t>(cw.bits.size()), cw.format};
    for (size_t i = 0; i < cw.bits.size(); i++)
        w.bits[i] = engine.decrypt(cw.bits[i]);
    return w;
}

// --- serialization ------------------------------------------------------

// Raw form: l consecutive sample blocks, LSB first.
inline size_t word_payload_size(const TlweParams& params, uint8_t l)
{
    return static_cast<size_t>(l) * sample_byte_size(params);
}

inline void write_word_samples(ByteWriter& w, const CipherWord& cw)
{
    for (const CipherBit& b : cw.bits)
        write_sample(w, b.sample());
}

// Framed form: u8 length prefix, then the raw blocks.
inline void write_word(ByteWriter& w, const CipherWord& cw)
{
    w.u8(static_cast<uint8_t>(cw.bits.size()));
    write_word_samples(w, cw);
}

inline CipherWord read_word(ByteReader& r, const TlweParams& params,
                            FixedPointFormat fmt)
{
    uint8_t l = r.u8();
    if (l != fmt.total_bits())
        throw DecodeError("cipher word length " + std::to_string(l) +
                          " does not match negotiated format l=" +
                          std::to_string(fmt.total_bits()));
    CipherWord cw{{}, fmt};
    cw.bits.reserve(l);
    for (uint8_t i = 0; i < l; i++)
        cw.bits.emplace_back(read_sample(r, params.n));
    return cw;
}

}  // namespace locpir
