"""RIS passive-beamforming toolkit.

Cascaded-channel decoupling solvers for the RIS regulation matrix, baseline
solvers, achievable-rate evaluation, and a seeded Monte Carlo sweep harness
with CSV and figure output.
"""

from .channel import (
    ArrayGeometry,
    ChannelConfig,
    LinkRealization,
    PathComponent,
    SeedRecord,
    draw_link,
    link_stream,
    steering_vector,
    synthesize_channel,
    ula,
    upa,
)
from .errors import ConfigurationError, DomainError, NumericalError, RisdcError
from .evaluation import (
    LinkBudget,
    PrecoderResult,
    achievable_rate,
    decoupled_rate_closed_form,
    design_precoder,
    effective_channel,
    multiuser_sum_rate,
)
from .experiments import (
    ExperimentConfig,
    SweepResult,
    TrialRecord,
    default_multi_user_config,
    default_single_user_config,
    load_config,
    read_csv_records,
    run_multi_user_sweep,
    run_single_user_sweep,
    solve_once,
    write_csv,
)
from .regulation import (
    RegulationMatrix,
    haar_random_unitary,
    mirror_identity,
    project_full_to_diagonal,
    random_phase_diag,
)
from .solvers import (
    DecoupledSolution,
    PAWeights,
    ao_diagonal_solve,
    haar_rotate_channels,
    k1_phase_align,
    pa_combine,
    svd_decouple,
    thin_decouple,
)

__version__ = "0.1.0"
