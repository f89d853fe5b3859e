from setuptools import setup

setup(name='et_opacity',
      version='1.0',
      description="Execution-time opacity analysis of timed automata",
      classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering',
        'License :: OSI Approved :: Apache Software License',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: Implementation :: CPython',
      ],
      keywords='timed automata opacity verification',
      license='Apache License, Version 2.0',
      packages=[
          'et_opacity',
          'et_opacity.test',
      ],
      package_data={
          'et_opacity.test': ['*.ta', '*.cfg'],
      },
      python_requires='>=3.9',
      install_requires=[
        'numpy',
      ],
      test_suite='et_opacity.test',
      entry_points="""
      [console_scripts]
      opaq=et_opacity.cli:main
      """
)
