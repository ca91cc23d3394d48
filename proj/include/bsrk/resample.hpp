#pragma once

#include "bsrk/raster.hpp"

namespace bsrk {

/// Block-mean coarsening. target_cell_size must be an integer multiple of
/// the source cell size. Missing cells are excluded from each block mean;
/// an all-missing block stays missing.
RasterGrid coarsen_mean(const RasterGrid& src, double target_cell_size);

/// Per-block percentage of source cells equal to class_code, over the
/// non-missing cells of the block. Produces a Percentage grid.
RasterGrid class_fraction(const CategoricalLandCover& src, double target_cell_size,
                          int class_code);

/// Cubic-convolution resampling (a = -0.5, Catmull-Rom) to the cell centers
/// of the target extent, with reflective extension at the source edges.
/// A missing source neighbor is replaced by the nearest non-missing value in
/// its grid row; a fully missing 4x4 neighborhood yields missing.
RasterGrid resample_bicubic(const RasterGrid& src, const GeoExtent& target);

/// Bicubic resampling to a grid coarsened by integer factor >= 2 over the
/// same bounds.
RasterGrid downsample_bicubic(const RasterGrid& src, int factor);

/// Bicubic resampling to a grid refined by integer factor >= 2 over the
/// same bounds.
RasterGrid upsample_bicubic(const RasterGrid& src, int factor);

/// Registers src onto the reference grid: a pure crop when registrations
/// already coincide, bicubic resampling otherwise.
RasterGrid align_to(const RasterGrid& src, const GeoExtent& reference);

/// Array-level bicubic upsample by an integer factor, used where no
/// georeferencing is attached (patch tensors). Same kernel and boundary
/// rules as the grid-level operations.
Array2D upsample_bicubic_array(const Array2D& src, int factor);
Array2D downsample_bicubic_array(const Array2D& src, int factor);

} // namespace bsrk
