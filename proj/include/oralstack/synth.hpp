#pragma once
// Deterministic synthetic cohorts with plantable class signal per modality.

#include <array>
#include <cstdint>
#include <filesystem>

#include "oralstack/core.hpp"

namespace oralstack {

struct SynthConfig {
    std::size_t patients = 40;
    std::size_t images_min = 2;
    std::size_t images_max = 5;
    std::array<double, kClasses> class_priors = {0.25, 0.25, 0.25, 0.25};
    std::size_t cube_size = 32;
    // Signal strengths in [0, 1]; 0 makes the modality class-independent.
    double signal_deep = 0.8;
    double signal_spectral = 0.8;
    double signal_texture = 0.8;
    double signal_demographic = 0.8;
    double patient_effect = 1.0;  // scale of the per-patient shared bias
    double noise = 1.0;           // scale of per-image and per-pixel noise
    double missing_rate = 0.05;   // per demographic field
    std::uint64_t seed = 0;

    // Sets all four signal strengths.
    void set_signal(double s);
    // Throws ConfigError with a message naming the offending field.
    void validate() const;
};

struct SynthSummary {
    std::filesystem::path manifest;
    std::size_t images = 0;
    std::array<std::size_t, kClasses> class_patients{};
    std::array<std::size_t, kClasses> class_images{};
};

// Writes cubes/<sample>.hsc, embeddings/<sample>.emb and manifest.csv
// (relative paths) under out_dir.
SynthSummary generate_cohort(const SynthConfig& cfg, const std::filesystem::path& out_dir);

// Mean tissue reflectance of a class before patient/pixel noise.
Spectrum class_prototype_spectrum(int label, double spectral_signal);

// Smooth basis curves peaking at 610 / 550 / 460 nm (Gaussian, sigma 40 nm).
const std::array<std::array<double, kBands>, 3>& rgb_basis();

// R * basis_r + G * basis_g + B * basis_b; components must lie in [0, 1].
Spectrum expand_rgb_to_pseudo_hsi(double r, double g, double b);

} // namespace oralstack
