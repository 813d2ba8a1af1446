#pragma once

namespace dsb {

constexpr const char* kProjectName = "dsb-lab";
constexpr const char* kVersion = "0.1.0";

}  // namespace dsb
