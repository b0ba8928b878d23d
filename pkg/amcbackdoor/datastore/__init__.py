from .dataset import (DatasetManifest,
                      LabeledDataset,
                      generate_dataset,
                      retransmit,
                      frame_seed,
                      frame_rng,
                      TX_STREAM,
                      CHANNEL_STREAM,
                      )
from .storage import (save_dataset,
                      load_dataset,
                      manifest_path,
                      DatasetFormatError,
                      DatasetVersionError,
                      TruncatedDatasetError,
                      ChecksumError,
                      )
