#include <catch2/catch_amalgamated.hpp>

#include "locpir/gate_engine.hpp"

using namespace locpir;

namespace {

GateEngine oracle_engine(uint64_t seed = 42,
                         TlweParams params = TlweParams::sec80())
{
    return GateEngine::make_tlwe_oracle(keygen(params, seed), seed + 1);
}

}  // namespace

TEST_CASE("gates match their truth tables under both engines")
{
    GateEngine clear = GateEngine::make_clear();
    GateEngine oracle = oracle_engine();

    for (GateEngine* eng : {&clear, &oracle}) {
        for (int a = 0; a <= 1; a++)
            for (int b = 0; b <= 1; b++) {
                const CipherBit ca = eng->encrypt(a);
                const CipherBit cb = eng->encrypt(b);
                CHECK(eng->decrypt(eng->hom_and(ca, cb)) == (a && b));
                CHECK(eng->decrypt(eng->hom_or(ca, cb)) == (a || b));
                CHECK(eng->decrypt(eng->hom_xor(ca, cb)) == (a != b));
                CHECK(eng->decrypt(eng->hom_xnor(ca, cb)) == (a == b));
                CHECK(eng->decrypt(eng->hom_not(ca)) == !a);
                for (int s = 0; s <= 1; s++) {
                    const CipherBit cs = eng->encrypt(s);
                    CHECK(eng->decrypt(eng->hom_mux(cs, ca, cb)) == (s ? a : b));
                }
            }
    }
}

TEST_CASE("gate counters follow the bootstrap accounting model")
{
    GateEngine clear = GateEngine::make_clear();
    GateEngine oracle = oracle_engine();

    for (GateEngine* eng : {&clear, &oracle}) {
        eng->counters().reset();
        const CipherBit a = eng->encrypt(true);
        const CipherBit b = eng->encrypt(false);

        (void)eng->hom_and(a, b);
        (void)eng->hom_or(a, b);
        (void)eng->hom_or(a, b);
        (void)eng->hom_xor(a, b);
        (void)eng->hom_xnor(a, b);
        (void)eng->hom_not(a);       // free
        (void)eng->hom_mux(a, a, b); // two units
        (void)eng->constant(true);   // free

        const GateCounterSnapshot s = eng->counters().snapshot();
        CHECK(s.and_gates == 1);
        CHECK(s.or_gates == 2);
        CHECK(s.xor_gates == 1);
        CHECK(s.xnor_gates == 1);
        CHECK(s.not_gates == 1);
        CHECK(s.mux_gates == 1);
        CHECK(s.bootstrap_units() == 1 + 2 + 1 + 1 + 2 * 1);
        CHECK(s.as_map().at("bootstrap_units") == s.bootstrap_units());
    }
}

TEST_CASE("clear and oracle engines count gate programs identically")
{
    GateEngine clear = GateEngine::make_clear();
    GateEngine oracle = oracle_engine();

    auto program = [](GateEngine& eng) {
        CipherBit x = eng.encrypt(true);
        CipherBit y = eng.encrypt(false);
        CipherBit z = eng.hom_xor(x, y);
        for (int i = 0; i < 5; i++)
            z = eng.hom_mux(z, x, eng.hom_and(y, z));
        return eng.counters().snapshot().bootstrap_units();
    };
    CHECK(program(clear) == program(oracle));
}

TEST_CASE("oracle refresh keeps long gate chains decryptable")
{
    GateEngine eng = oracle_engine(5, TlweParams::sec128());
    CipherBit acc = eng.encrypt(false);
    const CipherBit one = eng.encrypt(true);
    for (int i = 0; i < 1000; i++)
        acc = eng.hom_xor(acc, one);
    CHECK(eng.decrypt(acc) == false);  // 1000 is even
    acc = eng.hom_xor(acc, one);
    CHECK(eng.decrypt(acc) == true);
}

TEST_CASE("bootstrap oracle re-encrypts by phase sign")
{
    const TlweParams p = TlweParams::custom(8, 0.0);
    const SecretKey sk = keygen(p, 2);
    NoiseSampler sampler(3, p.sigma);

    auto thresholded = [&](uint32_t raw) {
        const TlweSample in = trivial_sample(Torus32{raw}, p);
        return decrypt_bit(bootstrap_oracle(in, sk, sampler), sk);
    };
    CHECK(thresholded(0x00000001u) == true);
    CHECK(thresholded(0x80000000u) == true);
    CHECK(thresholded(0x80000001u) == false);
    CHECK(thresholded(0u) == false);  // sign rule at exactly 0 differs from decrypt
}

TEST_CASE("fork gives reproducible per-lane noise streams")
{
    GateEngine eng = oracle_engine(9);
    const CipherBit a = eng.encrypt(true);
    const CipherBit b = eng.encrypt(true);

    GateEngine f1 = eng.fork(0);
    GateEngine f2 = eng.fork(0);
    GateEngine f3 = eng.fork(1);
    const TlweSample s1 = f1.hom_and(a, b).sample();
    const TlweSample s2 = f2.hom_and(a, b).sample();
    const TlweSample s3 = f3.hom_and(a, b).sample();
    CHECK(s1.mask == s2.mask);
    CHECK(s1.body == s2.body);
    CHECK(s1.mask != s3.mask);

    // forks share one counter
    CHECK(eng.counters().snapshot().and_gates == 3);

    // the block id is shared and monotone
    const uint64_t blk = eng.acquire_fork_block();
    CHECK(f1.acquire_fork_block() == blk + 1);
    CHECK(eng.acquire_fork_block() == blk + 2);
}

TEST_CASE("engines reject foreign bits and missing keys")
{
    GateEngine clear = GateEngine::make_clear();
    GateEngine oracle = oracle_engine();

    const CipherBit plain = clear.encrypt(true);
    const CipherBit enc = oracle.encrypt(true);
    CHECK_THROWS_AS(oracle.hom_and(plain, enc), std::invalid_argument);
    CHECK_THROWS_AS(clear.hom_and(plain, enc), std::invalid_argument);
    CHECK_THROWS_AS(clear.params(), std::logic_error);
    CHECK_THROWS_AS(clear.secret_key(), std::logic_error);

    CHECK(parse_engine_kind("clear") == EngineKind::Clear);
    CHECK(parse_engine_kind("tlwe-oracle") == EngineKind::TlweOracle);
    CHECK_THROWS_AS(parse_engine_kind("tfhe"), std::invalid_argument);
}
