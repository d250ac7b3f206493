#pragma once

#include "pref/random.hpp"
#include "pref/tasks/mesh.hpp"
#include "pref/tasks/sdf.hpp"

namespace pref::tasks {

// Marching cubes over the lattice -1 + i * 2 / (res - 1), i in [0, res), with
// linear interpolation of the zero crossing on each edge. Vertices on shared
// edges are shared; triangles face outward (towards positive values).
// Throws DomainError for res < 2. A field without a sign change gives an
// empty mesh.
Mesh marching_cubes(const FieldSampler& field, int res);

// Intersection over union of the occupancies {sdf < 0} on the cell centers
// -1 + (i + 0.5) * 2 / res of a res^3 lattice. Two empty occupancies give 1.
double iou(const FieldSampler& a, const FieldSampler& b, int res);
// Same for occupancy masks precomputed on that lattice.
double iou(const std::vector<bool>& a, const std::vector<bool>& b);
std::vector<bool> occupancy(const FieldSampler& field, int res);

// Symmetric Chamfer distance between surface samples of two meshes: the mean
// Euclidean distance from each sample of one set to its nearest neighbour in
// the other, averaged over both directions. Throws DomainError when either
// mesh is empty.
double chamfer_distance(const Mesh& a, const Mesh& b, int samples, Rng& rng, int threads = 1);
double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int threads = 1);

}  // namespace pref::tasks
