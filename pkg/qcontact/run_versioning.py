""" output directory versioning tool """
import os
import hashlib
import json
import re
import shutil
import logging
from glob import glob

__all__ = 'RunArgument'

COMPLETION_MARKER = 'summary.json'


class RunArgument:
    """ Experiment arguments manager """

    def __init__(self, output_dir: str, **kwargs):
        """ Experiment arguments manager

         Parameter
        -------------------
        output_dir: str
            Directory to organize the artifact files. A directory holding a different configuration is never
            overwritten, a new one `<output_dir>_<md5 of parameter.json>` is issued instead.
        kwargs: resolved experiment arguments
        """
        assert type(output_dir) is str
        self.output_dir = self.issue_new_output_dir(output_dir.rstrip('/'), kwargs)
        self.parameter = kwargs
        logging.info('output: {}'.format(self.output_dir))
        for k, v in self.parameter.items():
            logging.info(' - [arg] {}: {}'.format(k, str(v)))
        self.__dict__.update(self.parameter)

    @staticmethod
    def md5(file_name):
        """ get MD5 checksum """
        hash_md5 = hashlib.md5()
        with open(file_name, "rb") as f:
            for chunk in iter(lambda: f.read(4096), b""):
                hash_md5.update(chunk)
        return hash_md5.hexdigest()

    @staticmethod
    def dump(parameter: dict, file_name: str):
        with open(file_name, 'w') as f:
            json.dump(parameter, f, sort_keys=True)

    def issue_new_output_dir(self, output_dir: str, parameter: dict):
        runs = self.cleanup_output_dir(output_dir)
        for _dir in runs:
            with open('{}/parameter.json'.format(_dir), 'r') as f:
                if parameter == json.load(f):
                    logging.info('find same configuration at: {}, artifacts are overwritten'.format(_dir))
                    return _dir
        if not os.path.exists('{}/parameter.json'.format(output_dir)):
            os.makedirs(output_dir, exist_ok=True)
            self.dump(parameter, '{}/parameter.json'.format(output_dir))
            return output_dir
        # a different configuration occupies the directory
        self.dump(parameter, '{}/tmp.json'.format(output_dir))
        _id = self.md5('{}/tmp.json'.format(output_dir))
        new_output_dir = '{}_{}'.format(output_dir, _id)
        os.makedirs(new_output_dir, exist_ok=True)
        shutil.move('{}/tmp.json'.format(output_dir), '{}/parameter.json'.format(new_output_dir))
        return new_output_dir

    @staticmethod
    def cleanup_output_dir(output_dir: str):
        """ drop runs of this tool that never completed, return the completed ones """
        pattern = re.compile(r'{}(_[0-9a-f]{{32}})?$'.format(re.escape(output_dir)))
        runs = [d for d in glob('{}*'.format(output_dir)) if pattern.match(d) and os.path.isdir(d)]
        completed = []
        for _dir in sorted(runs):
            if not os.path.exists('{}/parameter.json'.format(_dir)):
                continue
            if os.path.exists('{}/{}'.format(_dir, COMPLETION_MARKER)):
                completed.append(_dir)
            else:
                logging.info('removed incomplete run {}'.format(_dir))
                shutil.rmtree(_dir)
        return completed
