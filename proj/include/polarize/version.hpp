#ifndef POLARIZE_VERSION_HPP
#define POLARIZE_VERSION_HPP

namespace polarize {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace polarize

#endif
