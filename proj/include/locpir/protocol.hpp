#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locpir/circuits.hpp"
#include "locpir/codec.hpp"
#include "locpir/dataset.hpp"
#include "locpir/gate_engine.hpp"

namespace locpir {

// --- wire frames ----------------------------------------------------------

constexpr char kMagic[4] = {'L', 'P', 'I', 'R'};
constexpr uint16_t kWireVersion = 1;
constexpr size_t kFrameHeaderSize = 11;  // magic + version + type + payloadLen

enum class MsgType : uint8_t {
    Params = 1,
    ZeroSheet = 2,
    Query = 3,
    Response = 4,
    Error = 5,
};

enum class ErrorCode : uint8_t {
    BadFrame = 1,     // malformed payload
    Phase = 2,        // message not valid in the session's phase
    Length = 3,       // payload length does not match the negotiated shape
    Session = 4,      // unknown session id
    Unsupported = 5,  // message type the server never accepts
    Internal = 6,
};

struct WireFrame {
    MsgType type;
    std::vector<uint8_t> payload;

    std::vector<uint8_t> encode() const
    {
        ByteWriter w;
        w.bytes(std::span<const uint8_t>(
            reinterpret_cast<const uint8_t*>(kMagic), 4));
        w.u16(kWireVersion);
        w.u8(static_cast<uint8_t>(type));
        w.u32(static_cast<uint32_t>(payload.size()));
        w.bytes(payload);
        return w.take();
    }

    static WireFrame decode(std::span<const uint8_t> bytes)
    {
        ByteReader r(bytes);
        const std::span<const uint8_t> magic = r.bytes(4);
        if (!std::equal(magic.begin(), magic.end(), kMagic))
            throw DecodeError("bad frame magic");
        if (r.u16() != kWireVersion)
            throw DecodeError("unsupported wire version");
        const uint8_t type = r.u8();
        if (type < 1 || type > 5)
            throw DecodeError("unknown message type " + std::to_string(type));
        const uint32_t len = r.u32();
        if (r.remaining() != len)
            throw DecodeError("frame length mismatch");
        const std::span<const uint8_t> payload = r.bytes(len);
        WireFrame f{static_cast<MsgType>(type),
                    std::vector<uint8_t>(payload.begin(), payload.end())};
        r.expect_done();
        return f;
    }
};

inline WireFrame error_frame(ErrorCode code, const std::string& message)
{
    ByteWriter w;
    w.u8(static_cast<uint8_t>(code));
    w.bytes(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(message.data()), message.size()));
    return {MsgType::Error, w.take()};
}

inline std::pair<ErrorCode, std::string> parse_error(const WireFrame& f)
{
    if (f.type != MsgType::Error || f.payload.empty())
        throw DecodeError("not an error frame");
    return {static_cast<ErrorCode>(f.payload[0]),
            std::string(f.payload.begin() + 1, f.payload.end())};
}

// --- session negotiation ---------------------------------------------------

enum class SessionPhase : uint8_t { AwaitingSheet = 0, Ready = 1 };

// PARAMS reply payload: everything a client needs to speak the session.
struct SessionInfo {
    uint64_t session_id = 0;
    EngineKind engine = EngineKind::Clear;
    bool demo_mode = false;  // set when the server holds the oracle key
    SessionPhase phase = SessionPhase::AwaitingSheet;
    TlweParams params{0, 0.0, SecurityLevel::Custom};
    FixedPointFormat format;
    uint32_t region_count = 0;  // N
    uint32_t service_bits = 0;  // m

    std::vector<uint8_t> encode() const
    {
        ByteWriter w;
        w.u64(session_id);
        w.u8(static_cast<uint8_t>(engine));
        w.u8(demo_mode ? 1 : 0);
        w.u8(static_cast<uint8_t>(phase));
        w.u8(static_cast<uint8_t>(params.level));
        w.u32(params.n);
        w.f64(params.sigma);
        w.u8(format.int_bits);
        w.u8(format.frac_bits);
        w.u32(region_count);
        w.u32(service_bits);
        return w.take();
    }

    static SessionInfo decode(std::span<const uint8_t> bytes)
    {
        ByteReader r(bytes);
        SessionInfo s;
        s.session_id = r.u64();
        s.engine = static_cast<EngineKind>(r.u8());
        s.demo_mode = r.u8() != 0;
        s.phase = static_cast<SessionPhase>(r.u8());
        s.params.level = static_cast<SecurityLevel>(r.u8());
        s.params.n = r.u32();
        s.params.sigma = r.f64();
        s.format.int_bits = r.u8();
        s.format.frac_bits = r.u8();
        s.region_count = r.u32();
        s.service_bits = r.u32();
        r.expect_done();
        s.params.validate();
        s.format.validate();
        return s;
    }
};

// PARAMS request payload: empty for a new session, u64 id to resume one.
inline std::vector<uint8_t> params_request(std::optional<uint64_t> resume = {})
{
    if (!resume)
        return {};
    ByteWriter w;
    w.u64(*resume);
    return w.take();
}

// --- client-side payloads ---------------------------------------------------

// N*m fresh encryptions of 0, region-major, bit-minor, LSB first.
inline std::vector<uint8_t> zero_sheet_payload(const SecretKey& sk, uint32_t regions,
                                               uint32_t bits_per_service,
                                               NoiseSampler& sampler)
{
    return ZeroSampleSheet::generate(sk, regions, bits_per_service, sampler)
        .to_payload();
}

// Clear-engine stand-in: trivial zero samples keep the flow and the byte
// counts of the real sheet without any key material.
inline std::vector<uint8_t> zero_sheet_payload_trivial(const TlweParams& params,
                                                       uint32_t regions,
                                                       uint32_t bits_per_service)
{
    ByteWriter w;
    for (size_t i = 0; i < static_cast<size_t>(regions) * bits_per_service; i++)
        write_sample(w, trivial_sample({0}, params));
    return w.take();
}

// Two framed CipherWords, latitude then longitude.
inline std::vector<uint8_t> query_payload(const GeoCoordinate& where,
                                          const FixedPointFormat& format,
                                          const SecretKey& sk, NoiseSampler& sampler)
{
    ByteWriter w;
    write_word(w, encrypt_word(encode_fixed(where.lat, format), sk, sampler));
    write_word(w, encrypt_word(encode_fixed(where.lon, format), sk, sampler));
    return w.take();
}

inline std::vector<uint8_t> query_payload_trivial(const GeoCoordinate& where,
                                                  const FixedPointFormat& format,
                                                  const TlweParams& params)
{
    auto trivial_word = [&](double v) {
        const PlainWord pw = encode_fixed(v, format);
        CipherWord cw{{}, format};
        for (uint8_t b : pw.bits)
            cw.bits.push_back(CipherBit(trivial_sample(encode_bit(b != 0), params)));
        return cw;
    };
    ByteWriter w;
    write_word(w, trivial_word(where.lat));
    write_word(w, trivial_word(where.lon));
    return w.take();
}

// RESPONSE payload: m raw samples, LSB first.
inline uint64_t decrypt_response(std::span<const uint8_t> payload, const SecretKey& sk,
                                 uint32_t service_bits)
{
    const size_t want = service_bits * sample_byte_size(sk.params);
    if (payload.size() != want)
        throw DecodeError("response payload is " + std::to_string(payload.size()) +
                          " bytes, expected " + std::to_string(want));
    ByteReader r(payload);
    uint64_t v = 0;
    for (uint32_t j = 0; j < service_bits; j++)
        if (decrypt_bit(read_sample(r, sk.params.n), sk))
            v |= 1ull << j;
    return v;
}

// Clear-engine responses are trivial samples; reading the body suffices.
inline uint64_t decode_response_trivial(std::span<const uint8_t> payload,
                                        const TlweParams& params,
                                        uint32_t service_bits)
{
    SecretKey zero{std::vector<uint8_t>(params.n, 0), params};
    return decrypt_response(payload, zero, service_bits);
}

// --- server ------------------------------------------------------------------

struct ServerConfig {
    std::vector<RegionRecord> records;
    DatasetConfig dataset;
    TlweParams params{0, 0.0, SecurityLevel::Custom};  // wire format even when clear
    EngineKind engine = EngineKind::Clear;
    std::optional<SecretKey> oracle_key;  // demo mode only
    unsigned workers = 1;
    uint64_t seed = 1;
};

// Frame-in/frame-out server core: transport-agnostic, session-aware.
// A connection keeps a `bound` session id (0 = none) and passes it to
// handle(); PARAMS binds it, every other type requires it.
class Server {
public:
    explicit Server(ServerConfig cfg)
        : cfg_(std::move(cfg)),
          engine_(cfg_.engine == EngineKind::Clear
                      ? GateEngine::make_clear()
                      : GateEngine::make_tlwe_oracle(require_key(cfg_), cfg_.seed))
    {
        cfg_.params.validate();
        cfg_.dataset.format.validate();
        if (cfg_.records.size() != cfg_.dataset.region_count)
            throw std::invalid_argument("dataset config does not match records");
    }

    const GateEngine& engine() const { return engine_; }

    WireFrame handle(uint64_t& bound, const WireFrame& request)
    {
        try {
            switch (request.type) {
            case MsgType::Params:
                return handle_params(bound, request);
            case MsgType::ZeroSheet:
            case MsgType::Query: {
                Session* s = find_session(bound);
                if (!s)
                    return error_frame(ErrorCode::Phase,
                                       "no session bound; send PARAMS first");
                std::lock_guard<std::mutex> lock(s->mutex);
                return request.type == MsgType::ZeroSheet ? handle_sheet(*s, request)
                                                          : handle_query(*s, request);
            }
            default:
                return error_frame(ErrorCode::Unsupported,
                                   "server does not accept this message type");
            }
        } catch (const DecodeError& e) {
            return error_frame(ErrorCode::BadFrame, e.what());
        } catch (const std::exception& e) {
            return error_frame(ErrorCode::Internal, e.what());
        }
    }

    SessionInfo session_info(uint64_t id)
    {
        Session* s = find_session(id);
        if (!s)
            throw std::invalid_argument("unknown session " + std::to_string(id));
        std::lock_guard<std::mutex> lock(s->mutex);
        return info_for(*s);
    }

private:
    struct Session {
        uint64_t id = 0;
        SessionPhase phase = SessionPhase::AwaitingSheet;
        std::vector<EncodedRegion> regions;  // filled when the sheet arrives
        std::mutex mutex;
    };

    static SecretKey require_key(const ServerConfig& cfg)
    {
        if (!cfg.oracle_key)
            throw std::invalid_argument(
                "tlwe-oracle engine needs an explicit oracle key");
        return *cfg.oracle_key;
    }

    Session* find_session(uint64_t id)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second.get();
    }

    SessionInfo info_for(const Session& s) const
    {
        SessionInfo info;
        info.session_id = s.id;
        info.engine = cfg_.engine;
        info.demo_mode = cfg_.engine == EngineKind::TlweOracle;
        info.phase = s.phase;
        info.params = cfg_.params;
        info.format = cfg_.dataset.format;
        info.region_count = cfg_.dataset.region_count;
        info.service_bits = cfg_.dataset.service_bits;
        return info;
    }

    WireFrame handle_params(uint64_t& bound, const WireFrame& request)
    {
        uint64_t id = 0;
        if (request.payload.size() == 8) {
            ByteReader r(request.payload);
            id = r.u64();
        } else if (!request.payload.empty()) {
            return error_frame(ErrorCode::BadFrame,
                               "PARAMS payload must be empty or a session id");
        }

        std::unique_lock<std::mutex> lock(mutex_);
        Session* s;
        if (id == 0) {
            auto fresh = std::make_unique<Session>();
            fresh->id = next_session_id_++;
            s = fresh.get();
            sessions_[s->id] = std::move(fresh);
        } else {
            auto it = sessions_.find(id);
            if (it == sessions_.end())
                return error_frame(ErrorCode::Session,
                                   "unknown session " + std::to_string(id));
            s = it->second.get();
        }
        lock.unlock();

        bound = s->id;
        std::lock_guard<std::mutex> session_lock(s->mutex);
        return {MsgType::Params, info_for(*s).encode()};
    }

    WireFrame handle_sheet(Session& s, const WireFrame& request)
    {
        if (s.phase != SessionPhase::AwaitingSheet)
            return error_frame(ErrorCode::Phase, "session already has its sheet");

        const uint32_t N = cfg_.dataset.region_count;
        const uint32_t m = cfg_.dataset.service_bits;
        const size_t want = static_cast<size_t>(N) * m * sample_byte_size(cfg_.params);
        if (request.payload.size() != want)
            return error_frame(ErrorCode::Length,
                               "sheet payload is " +
                                   std::to_string(request.payload.size()) +
                                   " bytes, expected " + std::to_string(want));

        ZeroSampleSheet sheet =
            ZeroSampleSheet::from_payload(request.payload, cfg_.params, N, m);
        std::vector<ServiceCiphertext> services =
            preprocess_services(service_values(cfg_.records), sheet, m);
        if (cfg_.engine == EngineKind::Clear)
            services = threshold_services(services);

        // state changes only after everything parsed and built
        s.regions = encode_regions(cfg_.records, cfg_.dataset.format, engine_,
                                   std::move(services));
        s.phase = SessionPhase::Ready;
        return {MsgType::Params, info_for(s).encode()};
    }

    WireFrame handle_query(Session& s, const WireFrame& request)
    {
        if (s.phase != SessionPhase::Ready)
            return error_frame(ErrorCode::Phase, "QUERY before ZEROSHEET");

        ByteReader r(request.payload);
        CipherWord x = read_word(r, cfg_.params, cfg_.dataset.format);
        CipherWord y = read_word(r, cfg_.params, cfg_.dataset.format);
        r.expect_done();
        if (cfg_.engine == EngineKind::Clear) {
            x = threshold_word(x);
            y = threshold_word(y);
        }

        const ServiceCiphertext result =
            loc_pir(x, y, s.regions, engine_, cfg_.workers);

        ByteWriter w;
        for (const CipherBit& b : result.bits)
            write_sample(w, b.kind() == EngineKind::Clear
                                ? trivial_sample(encode_bit(b.clear_bit()), cfg_.params)
                                : b.sample());
        return {MsgType::Response, w.take()};
    }

    // Clear engine: wire samples are trivial, so the body alone carries the
    // bit; reading it is decryption under the all-zero key.
    bool threshold_bit(const TlweSample& sample) const
    {
        return sample.body.raw <= 0x80000000u;
    }

    CipherWord threshold_word(const CipherWord& cw) const
    {
        CipherWord out{{}, cw.format};
        for (const CipherBit& b : cw.bits)
            out.bits.push_back(CipherBit(threshold_bit(b.sample())));
        return out;
    }

    std::vector<ServiceCiphertext> threshold_services(
        const std::vector<ServiceCiphertext>& in) const
    {
        std::vector<ServiceCiphertext> out(in.size());
        for (size_t i = 0; i < in.size(); i++)
            for (const CipherBit& b : in[i].bits)
                out[i].bits.push_back(CipherBit(threshold_bit(b.sample())));
        return out;
    }

    ServerConfig cfg_;
    GateEngine engine_;
    std::mutex mutex_;
    std::map<uint64_t, std::unique_ptr<Session>> sessions_;
    uint64_t next_session_id_ = 1;
};

}  // namespace locpir
