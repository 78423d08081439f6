#pragma once

#include "laserguide/arm.hpp"
#include "laserguide/optics.hpp"
#include "laserguide/workcell.hpp"

/// Synthetic scenario used by the bundled data, tests and examples. The
/// bedframe dimensions and tray positions are made up; only the tray counts
/// (17 inner, 36 outer) and tolerances follow the real assembly task.
namespace laserguide::demo {

/// Curved-top box, x in [-2, 2], y in [-1.5, 1.5], walls 1.2 m rising to
/// 1.5 m at the crest of the top deck.
workcell::TriMesh bedframe_mesh();

/// Bedframe with 17 inner (top deck) and 36 outer (wall) targets, an
/// interior and an exterior fixture set, and auto-generated stations.
workcell::Workcell bedframe_workcell();

/// Auto-station parameters used by the demo workcell.
workcell::AutoStationParams station_params();

/// Two perpendicular fan lines forming a cross, 60 mm ahead of the flange,
/// with small boresight offsets.
optics::LaserRig cross_rig();

}  // namespace laserguide::demo
