//! Concrete problem builders: the sensor-placement orienteering problem and
//! the robust shortest-path benchmark.

pub mod orienteering;
pub mod shortest_path;

pub use orienteering::{
    build_orienteering_recourse, example1, make_xi1, make_xi2, orienteering_to_ddid,
    OrienteeringInstance,
};
pub use shortest_path::{generate_shortest_path_instance, sp_to_ddid, ShortestPathInstance};
