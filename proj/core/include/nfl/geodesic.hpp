#pragma once

#include <vector>

#include "nfl/geometry.hpp"
#include "nfl/heat_pde.hpp"
#include "nfl/vec.hpp"

namespace nfl {

// Intrinsic (in-domain geodesic) distance between two points of D-bar.
// Exact for every built-in kind: straight segments where the segment
// stays in the domain, closed-form tangent-wrap around the circular
// obstacle, and a taut-band construction around the parabolic cap.
double intrinsic_distance(const Domain& dom, Vec2 a, Vec2 b);

// Connected components of the active-cell graph (faces with positive
// aperture), labels in [0, n_components); outside cells get -1.
int count_components(const ScalarField& field, std::vector<int>* labels = nullptr);

// Dijkstra distances from node (si, sj) over the active mask with the
// 8-neighbor stencil (axis edges h, diagonal edges sqrt(2) h; diagonals
// require both orthogonal neighbors active). Unreachable: +inf.
std::vector<double> grid_geodesic_distances(const ScalarField& field, int si,
                                            int sj);

}  // namespace nfl
