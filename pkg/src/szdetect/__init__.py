"""Seizure detection over multichannel EEG.

Ingestion of EDF/CSV recordings, per-channel normalization, nine
waveform features per channel per 1-second window, a family of
from-scratch classifiers (k-NN, condensed k-NN, SMO-trained kernel SVM,
logistic regression, and a CD-1 pretrained deep belief network), the
embedded-inference cost model, and the two evaluation protocols.
"""

from .classifiers import (
    Dataset,
    KnnModel,
    LrModel,
    SvmModel,
    cnn_condense,
    knn_classify,
    knn_classify_many,
    lr_classify,
    lr_classify_many,
    lr_train,
    svm_classify,
    svm_classify_many,
    svm_decision,
    svm_train,
)
from .costmodel import (
    CostParams,
    CostReport,
    computation_ops,
    memory_bits,
    relative_report,
    sf_ops,
)
from .dbn import (
    DbnModel,
    DbnTrainingConfig,
    Rbm,
    dbn_finetune,
    dbn_predict,
    dbn_predict_many,
    dbn_pretrain,
    rbm_cd1_update,
    rbm_init,
)
from .evaluation import (
    Metrics,
    Split,
    compute_metrics,
    majority_baseline,
    split_leave_one_out,
    split_single_patient,
)
from .features import (
    FEATURE_NAMES,
    ChannelFeatures,
    PeaksValleys,
    channel_features,
    detect_peaks_valleys,
    window_features,
)
from .ingestion import (
    EdfError,
    IngestionError,
    LabeledWindow,
    Record,
    SeizureAnnotations,
    label_windows,
    read_annotations,
    read_csv,
    read_edf,
    write_edf,
)
from .model_io import LoadedModel, ModelFormatError, load_model, save_model
from .preprocessing import (
    ChannelStats,
    MinMaxScaler,
    apply_scaler,
    fit_scaler,
    normalize_record,
)

__version__ = "0.1.0"
