from .ofdm import OfdmConfig, IqFrame, assemble_frame, receive, receive_batch
from .modulation import (Scheme,
                         ModulationScheme,
                         SCHEMES,
                         get_scheme,
                         map_symbols,
                         modulate_grid,
                         )
from .amplifier import PaConfig, rapp_pa, rapp_gain, saturation_amplitude
from .channel import (ChannelConfig,
                      ChainConfig,
                      apply_channel,
                      add_awgn,
                      draw_taps,
                      exponential_power_profile,
                      transmit,
                      )
