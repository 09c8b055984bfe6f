#include <catch2/catch_amalgamated.hpp>

#include "locpir/codec.hpp"

using namespace locpir;

TEST_CASE("fixed-point grid uses round-to-nearest, ties away from zero")
{
    const FixedPointFormat fmt{9, 7};  // LSB = 1/128 degree
    CHECK(scale_to_grid(37.4758, fmt) == 4797);  // 37.4758*128 = 4796.9
    CHECK(scale_to_grid(-37.4758, fmt) == -4797);
    CHECK(scale_to_grid(0.01171875, fmt) == 2);   // exactly 1.5 steps
    CHECK(scale_to_grid(-0.01171875, fmt) == -2);
}

TEST_CASE("encode/decode fixed-point round-trips to the nearest grid point")
{
    const FixedPointFormat fmt{9, 7};
    const PlainWord w = encode_fixed(37.4758, fmt);
    REQUIRE(w.bits.size() == 16);
    CHECK(w.signed_value() == 4797);
    CHECK(decode_fixed(w) == Catch::Approx(37.4765625));  // 4797/128

    const PlainWord neg = encode_fixed(-90.0, fmt);
    CHECK(neg.signed_value() == -11520);
    CHECK(decode_fixed(neg) == -90.0);

    // a value already on the grid is exact
    CHECK(decode_fixed(encode_fixed(0.5, fmt)) == 0.5);
}

TEST_CASE("two's complement layout: LSB at index 0, sign at index l-1")
{
    const FixedPointFormat fmt{3, 1};  // l = 4, values in [-4, 3.5]
    const PlainWord w = encode_fixed(-0.5, fmt);  // grid -1 = 0b1111
    CHECK(w.bits == std::vector<uint8_t>{1, 1, 1, 1});
    CHECK(w.signed_value() == -1);

    const PlainWord two = encode_fixed(1.0, fmt);  // grid 2 = 0b0010
    CHECK(two.bits == std::vector<uint8_t>{0, 1, 0, 0});
}

TEST_CASE("encoding rejects values outside the format's range")
{
    const FixedPointFormat fmt{9, 7};  // representable: [-256, 255.99...]
    CHECK_NOTHROW(encode_fixed(255.9, fmt));
    CHECK_THROWS_AS(encode_fixed(256.0, fmt), std::out_of_range);
    CHECK_THROWS_AS(encode_fixed(-256.01, fmt), std::out_of_range);
    CHECK_THROWS_AS(PlainWord::from_integer(1 << 15, fmt), std::out_of_range);
    CHECK_NOTHROW(PlainWord::from_integer(-(1 << 15), fmt));

    CHECK_THROWS_AS((FixedPointFormat{0, 4}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((FixedPointFormat{60, 10}).validate(), std::invalid_argument);
}

TEST_CASE("geographic coordinates are range-checked")
{
    CHECK_NOTHROW(GeoCoordinate(37.5, 127.0));
    CHECK_NOTHROW(GeoCoordinate(-90.0, 180.0));
    CHECK_THROWS_AS(GeoCoordinate(90.5, 0.0), std::out_of_range);
    CHECK_THROWS_AS(GeoCoordinate(0.0, -180.5), std::out_of_range);
}

TEST_CASE("word encryption round-trips under both engines")
{
    const FixedPointFormat fmt{9, 7};
    const PlainWord w = encode_fixed(-12.34, fmt);

    GateEngine clear = GateEngine::make_clear();
    const CipherWord cw = encrypt_word(w, clear);
    CHECK(decrypt_word(cw, clear).signed_value() == w.signed_value());

    const TlweParams p = TlweParams::sec128();
    GateEngine oracle = GateEngine::make_tlwe_oracle(keygen(p, 4), 5);
    const CipherWord ow = encrypt_word(w, oracle);
    CHECK(decrypt_word(ow, oracle.secret_key()).signed_value() == w.signed_value());

    // encrypting words costs no gates
    CHECK(oracle.counters().snapshot().bootstrap_units() == 0);
}

TEST_CASE("word payload sizes match l * 4(n+1)")
{
    CHECK(word_payload_size(TlweParams::sec80(), 13) == 28132);
    CHECK(word_payload_size(TlweParams::sec80(), 16) == 34624);
    CHECK(word_payload_size(TlweParams::sec128(), 13) == 32812);
    CHECK(word_payload_size(TlweParams::sec128(), 16) == 40384);
}

TEST_CASE("framed words serialize and validate their bit-length")
{
    const FixedPointFormat fmt{9, 7};
    const TlweParams p = TlweParams::sec80();
    const SecretKey sk = keygen(p, 31);
    NoiseSampler sampler(32, p.sigma);
    const CipherWord cw = encrypt_word(encode_fixed(37.5, fmt), sk, sampler);

    ByteWriter w;
    write_word(w, cw);
    const std::vector<uint8_t> bytes = w.take();
    CHECK(bytes.size() == 1 + word_payload_size(p, 16));

    ByteReader r(bytes);
    const CipherWord back = read_word(r, p, fmt);
    CHECK(decrypt_word(back, sk).signed_value() ==
          decrypt_word(cw, sk).signed_value());
    CHECK(r.done());

    // a reader negotiated for a different l refuses the frame
    ByteReader r2(bytes);
    CHECK_THROWS_AS(read_word(r2, p, FixedPointFormat{6, 7}), DecodeError);
}
