import os

# Keep test runs from writing dated log files into the repository.
os.environ.setdefault('CUBELAB_LOG_TO_FILE', '0')
