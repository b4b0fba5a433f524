"""riscc: channel customization and limited feedback for multi-RIS MIMO links.

Synthesizes cascaded multipath channels, selects and enhances orthogonal
paths via RIS phase design, builds SVD-form transceivers from limited CSI
and quantifies the spectral-efficiency cost of quantized feedback.
"""

from .channel import (CascadedGains, Path, RisPhaseConfig, SegmentChannel,
                      array_response, cascaded_gains, compose_pathsum,
                      compose_product, dirichlet_power, identity_phases,
                      sample_ris_rx, sample_tx_ris)
from .customization import (SelectionResult, customized_approx, design_phases,
                            enumeration_count, orthogonal_power_ratio,
                            prune_paths, remap_rx_indices, select_paths)
from .feedback import (LinkQuality, QuantizationPlan, c_bar_closed_form,
                       ergodic_se_loss_mc, exhaustive_partition,
                       greedy_partition, min_bits, quantize_direction,
                       sample_c_k, se_increase, se_loss_approx, se_loss_upper)
from .harness import (CsiRegime, ExperimentResult, ResultRow, emit,
                      load_result, run_trial, sweep)
from .scenario import (RisPlacement, ScenarioConfig, ScenarioError,
                       load_scenario, paper_default, path_loss, place_ris,
                       ris_size, sample_rx_position)
from .transceiver import (SvdFactors, Transceiver, cc_transceiver,
                          equal_power, r_pl_closed_form, spectral_efficiency,
                          svd_factors, svd_transceiver, water_filling,
                          whiten_combiner)

__version__ = "0.1.0"
