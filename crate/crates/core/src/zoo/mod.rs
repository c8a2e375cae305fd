//! Concrete models: continuous singlet models on the sphere and tabulated
//! finite models.

pub mod finite;
pub mod hall;
pub mod sphere;
pub mod toner_bacon;

pub use finite::{
    brans_model, conway_kochen_capacity_bound, conway_kochen_prior, hardy_capacity_bound,
    hardy_gamma_max, hardy_model, mermin_model, pawlowski_model, CONWAY_KOCHEN_DIRECTIONS,
};
pub use hall::{
    coplanar_prior_distance, hall_capacities, hall_density, hall_discretized_model,
    hall_measurement_dependence, hall_setting_entropy, hall_verify_singlet, HallCapacities,
    HallPriorDistance, HallQuadrature, SingletCheck,
};
pub use sphere::{singlet_probability, singlet_table, spread_setting_pairs, SphereDirection, SphereGrid, SphereSampler};
pub use toner_bacon::{
    toner_bacon_lambdas, toner_bacon_message, toner_bacon_message_entropy, toner_bacon_outcomes,
    toner_bacon_restriction, toner_bacon_run, HiddenPair, TonerBaconRun, TonerBaconSpec,
};
