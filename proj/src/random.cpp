#include "crc/random.hpp"

#include <bit>
#include <sstream>

#include "crc/error.hpp"

namespace crc {

std::string Rng::state() const {
    std::ostringstream os;
    os << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << std::bit_cast<std::uint64_t>(spare_);
    return os.str();
}

void Rng::restore(const std::string& state) {
    std::istringstream is(state);
    int spare_flag = 0;
    std::uint64_t spare_bits = 0;
    is >> engine_ >> spare_flag >> spare_bits;
    if (!is) throw DataError("malformed RNG state");
    has_spare_ = spare_flag != 0;
    spare_ = std::bit_cast<double>(spare_bits);
}

}  // namespace crc
