def pytest_addoption(parser):
    parser.addoption("--config", action="store", default="hodge.ini")
    parser.addoption("--seed", action="store", default=20240229, type=int)
