import logging
from datetime import datetime
import os
import inspect
import sys

from core.config import get_config


def customLogger(script_name=None):
    """
    Create and configure a logger named after the module that asked for it.

    Parameters:
    script_name (str, optional): Logger name. If None, the calling module's file name is used.

    Returns:
    logging.Logger: Configured logger instance
    """
    if script_name is None:
        frame = inspect.currentframe().f_back
        module = inspect.getmodule(frame)
        if module and getattr(module, '__file__', None):
            script_name = os.path.basename(module.__file__)
        else:
            script_name = os.path.basename(sys.argv[0]) or 'cube_lab'

    logger = logging.getLogger(script_name)

    if not logger.handlers:
        settings = get_config()['logging']
        log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        formatter = logging.Formatter(log_format)

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        if settings['to_file']:
            log_dir = settings['log_dir']
            if not os.path.isabs(log_dir):
                cur_path = os.path.abspath(os.path.dirname(__file__))
                log_dir = os.path.join(cur_path, '..', log_dir)
            date_dir = os.path.join(log_dir, datetime.now().strftime('%d%m%Y'))
            os.makedirs(date_dir, exist_ok=True)

            timestamp = datetime.now().strftime("%Y%m%d%H%M%S")
            file_handler = logging.FileHandler(os.path.join(date_dir, f"log_{timestamp}.log"))
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        logger.setLevel(getattr(logging, str(settings['level']).upper(), logging.INFO))
        logger.propagate = False
        logger.debug(f"Logger initialized for {script_name}")

    return logger
