#pragma once

#include <string>

#include "radiomics/volume.hpp"

namespace radiomics {

// Read-only NIfTI-1 support: 348-byte header with magic "n+1\0", 3D images,
// datatypes int16/float32/float64, scl_slope/scl_inter applied (slope 0 is
// treated as 1 per the NIfTI convention). Plain .nii and gzipped .nii.gz are
// both accepted; little-endian files only.
Volume load_nifti(const std::string& path);
Mask load_nifti_mask(const std::string& path);

// Modality from a _T1/_T1C/_T2/_FLAIR filename suffix; empty when absent.
std::string nifti_modality_from_filename(const std::string& path);

} // namespace radiomics
