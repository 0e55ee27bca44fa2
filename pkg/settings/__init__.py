from settings.logging_setup import JsonLogFormatter, configure_logging
from settings.run_config import RunConfig, flatten_config, load_config_file
