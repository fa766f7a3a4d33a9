"""advtransfer: adversarial-sample transferability studies and black-box attacks.

Train five classical classifier families on digit-image data, craft
adversarial samples against each, measure intra- and cross-technique
transferability, and attack a label-only prediction oracle by training
substitute models through Jacobian-based dataset augmentation (with periodic
step size and reservoir sampling refinements).
"""

from .crafting import (
    CraftRecord,
    CraftResult,
    Perturbation,
    craft_batch,
    dt_attack,
    fgsm,
    svm_attack,
)
from .data import Dataset, load_csv, load_idx, save_csv, split_disjoint, synthetic_digits
from .evaluation import (
    BlackboxAttackReport,
    TransferReport,
    blackbox_attack,
    cross_matrix,
    emit_report,
    intra_matrix,
    load_report,
    transfer_rate,
)
from .models import (
    FAMILIES,
    Ensemble,
    Model,
    accuracy,
    load_model,
    save_model,
    train,
)
from .oracle import LocalOracle, OracleHandle, RemoteOracle
from .server import OracleServer, start_server, server_url
from .substitute import (
    SubstituteConfig,
    SubstituteState,
    agreement,
    jacobian_augment,
    query_count,
    reservoir_augment,
    step_size,
    svm_augment,
    train_substitute,
)

__version__ = "0.1.0"
