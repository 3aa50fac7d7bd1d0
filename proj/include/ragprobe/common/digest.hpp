#pragma once

#include <string>
#include <string_view>

namespace ragprobe {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Incremental SHA-256 for digesting large or streamed content.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view data);
    std::string hex_digest();

private:
    void* ctx_;
};

} // namespace ragprobe
