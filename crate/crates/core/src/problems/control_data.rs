//! Input sequences for the control benchmark, computed offline with SciPy
//! SLSQP on the true model (`tools/control_reference.py`).

/// True-model optimum, shared by input bounds 1.5 and 1.6.
pub const OPTIMAL_INPUTS: [f64; 12] = [
    -1.500000000000,
    -0.428976641020,
    -0.433502230713,
    0.056462934905,
    -0.189133569071,
    0.195687541670,
    -0.034520045703,
    0.168294576295,
    0.029815301540,
    0.090666700446,
    0.031797723486,
    0.025177857959,
];
pub const OPTIMAL_COST: f64 = 5.963975024283339;

/// Max-margin point of the cost-6.81 level set under input bound 1.5. It
/// sits on the first state row and the first input row: no sequence is
/// strictly feasible for that bound.
pub const LITERAL_INIT: [f64; 12] = [
    -1.500000, -0.583098, -0.770029, 0.314506, 0.000438, 0.015720, 0.004400, 0.007727, 0.003937, 0.002130, 0.001907,
    -0.000248,
];

/// Max-margin point of the cost-6.81 level set under input bound 1.6;
/// every row has slack of at least 0.05.
pub const RELAXED_INIT: [f64; 12] = [
    -1.550000, -0.338526, -0.398233, 0.104630, -0.160301, 0.216456, -0.018608, 0.173155, 0.033525, 0.092094, 0.034274,
    0.033410,
];
