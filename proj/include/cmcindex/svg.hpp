#pragma once

#include "cmcindex/spectral.hpp"

#include <string>

namespace cmcindex {

/// Strip plot of the lowest eigenvalues: one tick per eigenvalue on a linear
/// axis, colored negative / null / positive by the null tolerance.
std::string spectrum_svg(const SpectralResult& res, const std::string& title,
                         int max_eigenvalues = 60);

}  // namespace cmcindex
