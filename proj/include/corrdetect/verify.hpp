#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace corrdetect {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Cross-oracle suite behind `corrdetect verify`. quick shrinks every grid so
// the whole run stays well under a minute on one core.
std::vector<VerifyCheck> run_verification(bool quick, std::uint64_t seed);

}  // namespace corrdetect
