#pragma once

namespace covapprox {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace covapprox
