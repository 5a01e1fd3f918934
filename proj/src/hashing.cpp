#include "dkgqa/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace dkgqa {

struct Sha256::State {
    EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : state_(std::make_unique<State>()) {
    state_->ctx = EVP_MD_CTX_new();
    if (state_->ctx == nullptr || EVP_DigestInit_ex(state_->ctx, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest initialisation failed");
    }
}

Sha256::~Sha256() {
    if (state_ && state_->ctx != nullptr) EVP_MD_CTX_free(state_->ctx);
}

Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

Sha256& Sha256::update(std::string_view data) {
    EVP_DigestUpdate(state_->ctx, data.data(), data.size());
    return *this;
}

Sha256& Sha256::field(std::string_view data) {
    std::array<unsigned char, 8> len{};
    auto n = static_cast<std::uint64_t>(data.size());
    for (int i = 7; i >= 0; --i) {
        len[static_cast<std::size_t>(i)] = static_cast<unsigned char>(n & 0xFF);
        n >>= 8;
    }
    EVP_DigestUpdate(state_->ctx, len.data(), len.size());
    return update(data);
}

std::string Sha256::hex_digest() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(state_->ctx, digest.data(), &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data);
    return h.hex_digest();
}

std::uint64_t stable_hash64(std::string_view data) {
    const auto hex = sha256_hex(data);
    return std::stoull(hex.substr(0, 16), nullptr, 16);
}

}  // namespace dkgqa
