#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace dkgqa {

/// Incremental SHA-256. Used for content-addressed ids, cache keys, and the
/// mock provider's fixture keys, all of which must be stable across builds.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    Sha256(Sha256&&) noexcept;
    Sha256& operator=(Sha256&&) noexcept;

    Sha256& update(std::string_view data);
    /// Adds a length-prefixed field so that ("ab","c") and ("a","bc") differ.
    Sha256& field(std::string_view data);
    std::string hex_digest();

private:
    struct State;
    std::unique_ptr<State> state_;
};

std::string sha256_hex(std::string_view data);

/// First 8 bytes of the SHA-256 digest, big-endian.
std::uint64_t stable_hash64(std::string_view data);

}  // namespace dkgqa
