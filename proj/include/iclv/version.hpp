#pragma once

namespace iclv {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace iclv
