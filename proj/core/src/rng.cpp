#include "czsl/rng.hpp"

#include "czsl/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace czsl {

std::string Rng::serialize_state() const {
    std::ostringstream out;
    out << engine_;
    out << ' ' << (has_cached_ ? 1 : 0);
    // Hexfloat keeps the cached gaussian bit-exact through text.
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", cached_);
    out << ' ' << buf;
    return out.str();
}

void Rng::restore_state(const std::string& text) {
    std::istringstream in(text);
    in >> engine_;
    int flag = 0;
    std::string hex;
    in >> flag >> hex;
    if (in.fail()) {
        throw IoError("rng state: malformed serialized state");
    }
    has_cached_ = flag != 0;
    cached_ = std::strtod(hex.c_str(), nullptr);
}

RngSet RngSet::from_seed(std::uint64_t master) {
    RngSet set;
    set.dataset = Rng(splitmix64(master ^ 0x01ULL));
    set.split = Rng(splitmix64(master ^ 0x02ULL));
    set.model_init = Rng(splitmix64(master ^ 0x03ULL));
    set.training = Rng(splitmix64(master ^ 0x04ULL));
    set.memory = Rng(splitmix64(master ^ 0x05ULL));
    set.generation = Rng(splitmix64(master ^ 0x06ULL));
    set.classifier = Rng(splitmix64(master ^ 0x07ULL));
    return set;
}

} // namespace czsl
