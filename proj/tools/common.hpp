#pragma once

#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>

#include "locpir/torus.hpp"

namespace locpir::cli {

// LOCPIR_SEED fixes all randomness; unset means a fresh random seed.
inline uint64_t seed_from_env()
{
    if (const char* env = std::getenv("LOCPIR_SEED")) {
        try {
            size_t used = 0;
            const uint64_t seed = std::stoull(env, &used);
            if (used != std::string(env).size())
                throw std::invalid_argument("");
            return seed;
        } catch (const std::exception&) {
            throw std::invalid_argument("LOCPIR_SEED must be an unsigned integer");
        }
    }
    std::random_device rd;
    return (static_cast<uint64_t>(rd()) << 32) | rd();
}

inline TlweParams params_for_security(int bits)
{
    switch (bits) {
    case 80:
        return TlweParams::sec80();
    case 128:
        return TlweParams::sec128();
    default:
        throw std::invalid_argument("--security must be 80 or 128");
    }
}

}  // namespace locpir::cli
