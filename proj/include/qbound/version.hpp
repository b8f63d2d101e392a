#ifndef QBOUND_VERSION_HPP
#define QBOUND_VERSION_HPP

namespace qbound {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
